#include "spt/checkpoint.hpp"

#include <cstdio>

#include "spt/error.hpp"
#include "spt/io.hpp"
#include "spt/serialization.hpp"

namespace spt {

namespace {

std::string trim_line(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ')) {
        s.pop_back();
    }
    return s;
}

}  // namespace

std::string serialize_run(const TrainRun& run) {
    return to_json(run).dump(2) + "\n";
}

TrainRun deserialize_run(std::string_view text) {
    try {
        return train_run_from_json(Json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
}

std::filesystem::path CheckpointStore::save(const TrainRun& run) const {
    const int epoch = run.epochs.empty() ? 0 : run.epochs.back().epoch;
    char name[32];
    std::snprintf(name, sizeof name, "epoch-%04d.json", epoch);
    const auto path = dir_ / name;
    write_file_atomic(path, serialize_run(run));
    if (!run.ledger.empty() || run.config.variant == Variant::spt_imp || run.config.track_impact) {
        write_file_atomic(dir_ / "impact_ledger.json", to_json(run.ledger).dump(2) + "\n");
    }
    write_file_atomic(dir_ / "latest", std::string(name) + "\n");
    return path;
}

std::optional<TrainRun> CheckpointStore::load_latest() const {
    const auto pointer = dir_ / "latest";
    if (!std::filesystem::exists(pointer)) {
        return std::nullopt;
    }
    return deserialize_run(read_file(dir_ / trim_line(read_file(pointer))));
}

TrainRun load_run(const std::filesystem::path& path) {
    if (std::filesystem::is_directory(path)) {
        auto run = CheckpointStore(path).load_latest();
        if (!run) {
            throw ConfigError("no checkpoint in " + path.string());
        }
        return *std::move(run);
    }
    if (!std::filesystem::exists(path)) {
        throw ConfigError("checkpoint " + path.string() + " does not exist");
    }
    return deserialize_run(read_file(path));
}

}  // namespace spt
