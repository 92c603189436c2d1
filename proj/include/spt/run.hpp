#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spt/backend.hpp"
#include "spt/core.hpp"
#include "spt/corrector.hpp"

namespace spt {

struct TrainerConfig {
    Variant variant = Variant::spt_p;
    int n_candidates = 3;
    int max_epochs = 5;
    std::string dataset_path;
    // When set, this file is the test set and dataset_path is used whole for training.
    std::string test_dataset_path;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    BackendConfig generator;
    BackendConfig corrector = [] {
        BackendConfig c;
        c.temperature = 1.0;
        return c;
    }();
    std::string initial_prompt;
    std::string initial_corrector = std::string(kInitialCorrectorPrompt);
    bool evaluate_test_each_epoch = true;
    EvalScope impact_scope = EvalScope::mistake_set;
    // Impact scores are always tracked for spt-imp; this turns them on for the other variants.
    bool track_impact = false;
    std::string checkpoint_dir;
    int eval_parallelism = 0;

    friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

// Throws ConfigError on the first out-of-range field.
void validate(const TrainerConfig& config);

struct CandidateRecord {
    MetaPrompt prompt;
    Accuracy mistake_accuracy;
    bool marker_missing = false;

    friend bool operator==(const CandidateRecord&, const CandidateRecord&) = default;
};

struct EpochRecord {
    int epoch = 0;
    MetaPrompt prompt;     // prompt under evaluation this epoch
    MetaPrompt corrector;  // corrector prompt used this epoch
    Accuracy train_accuracy;
    std::vector<std::string> mistake_ids;
    int unparseable = 0;
    // Perfect training accuracy; no candidates were requested.
    bool terminal = false;
    std::vector<CandidateRecord> candidates;
    std::optional<int> selected_index;
    // No candidate fixed any mistake; next_prompt repeats prompt.
    bool stalled = false;
    MetaPrompt next_prompt;
    std::vector<std::string> repeated_mistake_ids;
    bool corrector_updated = false;
    MetaPrompt next_corrector;
    // Accuracy of next_prompt on the test split, when measured.
    std::optional<Accuracy> test_accuracy;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

enum class RunStatus { running, completed, aborted };

struct TrainRun {
    TrainerConfig config;
    std::uint64_t seed = 0;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<EpochRecord> epochs;
    ImpactLedger ledger;
    // State carried into the next epoch.
    MetaPrompt current_prompt;
    MetaPrompt current_corrector;
    std::optional<Accuracy> final_train_accuracy;
    RunStatus status = RunStatus::running;

    friend bool operator==(const TrainRun&, const TrainRun&) = default;
};

}  // namespace spt
