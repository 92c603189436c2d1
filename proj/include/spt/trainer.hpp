#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spt/backend.hpp"
#include "spt/checkpoint.hpp"
#include "spt/generator.hpp"
#include "spt/run.hpp"

namespace spt {

struct Agents {
    ChatBackend& generator;
    ChatBackend& corrector;
};

struct TrainData {
    std::vector<McqItem> train;
    std::vector<McqItem> test;
};

// Loads the dataset and splits it, or pairs it with test_dataset_path.
TrainData prepare_data(const TrainerConfig& config);

struct TrainOptions {
    // Checked between epochs; a set flag ends the run as aborted.
    const std::atomic<bool>* abort = nullptr;
    std::function<void(const EpochRecord&)> on_epoch;
};

// First index holding the largest accuracy; nullopt for an empty list.
std::optional<std::size_t> select_best(std::span<const Accuracy> accuracies);

// Impact of each sentence the selected prompt adds to `prompt` (by normalized
// sentence, in the selected prompt's order). acc_before is the prompt's
// accuracy on the scope set: zero on its own mistake set, or
// `prompt_train_accuracy` on the training set. acc_after re-evaluates
// "<prompt> <sentence>" on the same set.
std::vector<ImpactEntry> compute_impact_scores(ChatBackend& generator, const MetaPrompt& prompt,
                                               const MetaPrompt& selected, std::span<const Mistake> mistakes,
                                               std::span<const McqItem> train_items, Accuracy prompt_train_accuracy,
                                               EvalScope scope, int epoch, const EvalOptions& eval = {});

// Fresh run state from a config and its data split.
TrainRun start_run(const TrainerConfig& config, const TrainData& data);

// One evaluate / correct / select / (self-update) cycle. Appends an
// EpochRecord and advances the run's current prompts. Backend errors
// propagate and leave `run` untouched.
void run_epoch(TrainRun& run, const TrainData& data, Agents agents);

// Runs epochs until max_epochs, perfect training accuracy, or abort,
// checkpointing after each epoch when the config names a directory.
TrainRun train(const TrainerConfig& config, Agents agents, const TrainOptions& options = {});

// Continues a checkpointed run with the same data split. An aborted run is
// picked up again; a completed one comes back unchanged.
TrainRun resume(TrainRun run, Agents agents, const TrainOptions& options = {});

// train(), or resume() when the checkpoint directory already holds a run.
TrainRun train_or_resume(const TrainerConfig& config, Agents agents, const TrainOptions& options = {});

struct RunSummary {
    MetaPrompt final_prompt;
    std::optional<Accuracy> final_train_accuracy;
    // Observational only; never used for selection.
    std::optional<Accuracy> best_test_accuracy;
    std::optional<int> best_test_epoch;
};

RunSummary summarize(const TrainRun& run);

}  // namespace spt
