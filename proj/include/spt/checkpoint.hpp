#pragma once

#include <filesystem>
#include <optional>

#include "spt/run.hpp"

namespace spt {

// Directory of per-epoch run snapshots:
//   epoch-0000.json, epoch-0001.json, ...  full TrainRun documents
//   latest                                 name of the newest snapshot
//   impact_ledger.json                     ledger alone, when impact is tracked
// Every file is written to a temp name and renamed into place.
class CheckpointStore {
public:
    explicit CheckpointStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const noexcept { return dir_; }

    // Writes the snapshot for the run's last epoch, then moves `latest`.
    std::filesystem::path save(const TrainRun& run) const;

    // nullopt when the directory holds no `latest` pointer.
    std::optional<TrainRun> load_latest() const;

private:
    std::filesystem::path dir_;
};

std::string serialize_run(const TrainRun& run);
TrainRun deserialize_run(std::string_view text);

// Accepts a snapshot file or a checkpoint directory (follows `latest`).
TrainRun load_run(const std::filesystem::path& path);

}  // namespace spt
