#include "spt/trainer.hpp"

#include <algorithm>
#include <set>

#include "spt/corrector.hpp"
#include "spt/datasets.hpp"
#include "spt/error.hpp"

namespace spt {

namespace {

std::vector<std::string> ids_of(std::span<const McqItem> items) {
    std::vector<std::string> ids;
    ids.reserve(items.size());
    for (const auto& item : items) {
        ids.push_back(item.id);
    }
    return ids;
}

EvalOptions eval_options(const TrainerConfig& config) {
    return EvalOptions{config.eval_parallelism, config.generator.reask_limit};
}

bool tracks_impact(const TrainerConfig& config) {
    return config.variant == Variant::spt_imp || config.track_impact;
}

std::string append_sentence(const MetaPrompt& prompt, const std::string& sentence) {
    return prompt.empty() ? sentence : prompt.text() + " " + sentence;
}

void run_corrector_update(const TrainRun& run, EpochRecord& record, ChatBackend& corrector,
                          std::span<const Mistake> repeated, const MetaPrompt& shown_selected) {
    const Variant variant = run.config.variant;
    std::vector<ChatMessage> request;
    if (variant == Variant::spt_pc) {
        if (repeated.empty()) {
            return;
        }
        request = build_c_update_request(variant, record.corrector, record.prompt, shown_selected, repeated);
    } else if (variant == Variant::spt_imp) {
        if (run.ledger.empty()) {
            return;
        }
        request = build_c_update_request(variant, record.corrector, record.prompt, shown_selected, repeated,
                                         &run.ledger);
    } else {
        return;
    }
    const std::string reply = corrector.complete(request, CallTag{CallPurpose::c_update, "", 0, 0});
    try {
        auto parsed = parse_new_prompt(reply);
        record.next_corrector = MetaPrompt(std::move(parsed.text), PromptOrigin::self_update(record.epoch));
        record.corrector_updated = true;
    } catch (const EmptyPromptError&) {
        // Keep the current corrector prompt.
    }
}

}  // namespace

void validate(const TrainerConfig& config) {
    if (config.n_candidates < 1) {
        throw ConfigError("n_candidates must be >= 1");
    }
    if (config.max_epochs < 1) {
        throw ConfigError("max_epochs must be >= 1");
    }
    if (config.test_dataset_path.empty() && !(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie strictly between 0 and 1");
    }
    if (config.dataset_path.empty()) {
        throw ConfigError("no dataset given");
    }
    if (config.generator.max_retries < 0 || config.corrector.max_retries < 0) {
        throw ConfigError("max_retries must be >= 0");
    }
}

TrainData prepare_data(const TrainerConfig& config) {
    auto items = load_dataset(config.dataset_path);
    if (!config.test_dataset_path.empty()) {
        auto test = load_dataset(config.test_dataset_path);
        std::set<std::string> train_ids;
        for (const auto& item : items) {
            train_ids.insert(item.id);
        }
        for (const auto& item : test) {
            if (train_ids.contains(item.id)) {
                throw ValidationError("item '" + item.id + "' appears in both the training and test files");
            }
        }
        if (items.empty() || test.empty()) {
            throw ValidationError("training and test files must both hold items");
        }
        return {std::move(items), std::move(test)};
    }
    auto split = split_dataset(items, config.train_fraction, config.split_seed);
    return {std::move(split.train), std::move(split.test)};
}

std::optional<std::size_t> select_best(std::span<const Accuracy> accuracies) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        if (!best || compare(accuracies[i], accuracies[*best]) > 0) {
            best = i;
        }
    }
    return best;
}

std::vector<ImpactEntry> compute_impact_scores(ChatBackend& generator, const MetaPrompt& prompt,
                                               const MetaPrompt& selected, std::span<const Mistake> mistakes,
                                               std::span<const McqItem> train_items, Accuracy prompt_train_accuracy,
                                               EvalScope scope, int epoch, const EvalOptions& eval) {
    const std::set<std::string> existing(prompt.sentences().begin(), prompt.sentences().end());
    std::set<std::string> seen;
    std::vector<ImpactEntry> entries;
    for (const auto& sentence : selected.sentences()) {
        if (existing.contains(sentence) || !seen.insert(sentence).second) {
            continue;
        }
        const MetaPrompt extended(append_sentence(prompt, sentence));
        Accuracy before;
        Accuracy after;
        if (scope == EvalScope::mistake_set) {
            before = Accuracy{0, static_cast<std::int64_t>(mistakes.size())};
            after = evaluate_on_mistakes(generator, extended, mistakes, eval).accuracy;
        } else {
            before = prompt_train_accuracy;
            after = evaluate(generator, extended, train_items, eval).accuracy;
        }
        entries.push_back(make_impact_entry(sentence, before, after, epoch, scope));
    }
    return entries;
}

TrainRun start_run(const TrainerConfig& config, const TrainData& data) {
    validate(config);
    TrainRun run;
    run.config = config;
    run.seed = config.split_seed;
    run.train_ids = ids_of(data.train);
    run.test_ids = ids_of(data.test);
    run.current_prompt = MetaPrompt(config.initial_prompt);
    run.current_corrector = MetaPrompt(config.initial_corrector);
    return run;
}

void run_epoch(TrainRun& run, const TrainData& data, Agents agents) {
    if (run.status != RunStatus::running) {
        throw PreconditionError("run_epoch() on a run that is not running");
    }
    TrainRun next = run;
    const TrainerConfig& config = next.config;
    const EvalOptions eval = eval_options(config);

    EpochRecord record;
    record.epoch = static_cast<int>(next.epochs.size());
    record.prompt = next.current_prompt;
    record.corrector = next.current_corrector;
    record.next_prompt = record.prompt;
    record.next_corrector = record.corrector;

    // (1) Evaluate on the training split.
    const EvalResult train_eval = evaluate(agents.generator, record.prompt, data.train, eval);
    record.train_accuracy = train_eval.accuracy;
    for (const auto& m : train_eval.mistakes) {
        record.mistake_ids.push_back(m.item.id);
        if (m.given_index == kNoValidChoice) {
            ++record.unparseable;
        }
    }

    if (train_eval.mistakes.empty()) {
        record.terminal = true;
        next.final_train_accuracy = record.train_accuracy;
        next.status = RunStatus::completed;
    } else {
        const auto& mistakes = train_eval.mistakes;
        const ImpactLedger* ledger = config.variant == Variant::spt_imp ? &next.ledger : nullptr;

        // (2) Candidates from the corrector.
        std::vector<Candidate> candidates;
        try {
            candidates = generate_candidates(agents.corrector, config.variant, record.corrector, record.prompt,
                                             mistakes, config.n_candidates, record.epoch, ledger);
        } catch (const AllCandidatesFailedError&) {
            candidates.clear();
        }

        // (3) Score each candidate on the mistake set and keep the first best.
        std::vector<Accuracy> scores;
        std::vector<EvalResult> candidate_evals;
        for (const auto& c : candidates) {
            candidate_evals.push_back(evaluate_on_mistakes(agents.generator, c.prompt, mistakes, eval));
            scores.push_back(candidate_evals.back().accuracy);
            record.candidates.push_back({c.prompt, scores.back(), c.marker_missing});
        }
        const auto best = select_best(scores);
        std::vector<Mistake> repeated;
        MetaPrompt shown_selected = record.prompt;
        if (best) {
            record.selected_index = static_cast<int>(*best);
            shown_selected = candidates[*best].prompt;
            repeated = candidate_evals[*best].mistakes;
            for (auto& m : repeated) {
                // The corrector is shown what the current prompt answered.
                const auto it = std::find_if(mistakes.begin(), mistakes.end(),
                                             [&](const Mistake& orig) { return orig.item.id == m.item.id; });
                m = *it;
            }
        }
        record.stalled = !best || scores[*best].correct == 0;
        if (!record.stalled) {
            record.next_prompt = candidates[*best].prompt;
        } else if (!best) {
            repeated = mistakes;
        }
        for (const auto& m : repeated) {
            record.repeated_mistake_ids.push_back(m.item.id);
        }

        // (4) Sentence-level impact of what the selected prompt added.
        if (tracks_impact(config) && !record.stalled) {
            for (auto& entry : compute_impact_scores(agents.generator, record.prompt, record.next_prompt, mistakes,
                                                     data.train, record.train_accuracy, config.impact_scope,
                                                     record.epoch, eval)) {
                next.ledger.add(std::move(entry));
            }
        }

        // (5) Corrector self-update.
        if (updates_corrector(config.variant) && best) {
            run_corrector_update(next, record, agents.corrector, repeated, shown_selected);
        }
    }

    // (6) Observational test accuracy of the prompt carried forward.
    if (config.evaluate_test_each_epoch && !data.test.empty()) {
        const EpochRecord* prev = next.epochs.empty() ? nullptr : &next.epochs.back();
        if (prev && prev->test_accuracy && prev->next_prompt.text() == record.next_prompt.text()) {
            record.test_accuracy = prev->test_accuracy;
        } else {
            record.test_accuracy = evaluate(agents.generator, record.next_prompt, data.test, eval).accuracy;
        }
    }

    next.current_prompt = record.next_prompt;
    next.current_corrector = record.next_corrector;
    next.epochs.push_back(std::move(record));
    run = std::move(next);
}

namespace {

TrainRun run_loop(TrainRun run, const TrainData& data, Agents agents, const TrainOptions& options) {
    std::optional<CheckpointStore> store;
    if (!run.config.checkpoint_dir.empty()) {
        store.emplace(run.config.checkpoint_dir);
    }
    while (run.status == RunStatus::running) {
        bool ran_epoch = false;
        if (static_cast<int>(run.epochs.size()) >= run.config.max_epochs) {
            run.final_train_accuracy =
                evaluate(agents.generator, run.current_prompt, data.train, eval_options(run.config)).accuracy;
            run.status = RunStatus::completed;
        } else if (options.abort != nullptr && options.abort->load()) {
            run.status = RunStatus::aborted;
        } else {
            run_epoch(run, data, agents);
            ran_epoch = true;
        }
        if (store) {
            store->save(run);
        }
        if (ran_epoch && options.on_epoch) {
            options.on_epoch(run.epochs.back());
        }
    }
    return run;
}

}  // namespace

TrainRun resume(TrainRun run, Agents agents, const TrainOptions& options) {
    const TrainData data = prepare_data(run.config);
    if (ids_of(data.train) != run.train_ids || ids_of(data.test) != run.test_ids) {
        throw ConfigError("dataset split no longer matches the checkpointed run");
    }
    if (run.status == RunStatus::aborted) {
        run.status = RunStatus::running;
    }
    return run_loop(std::move(run), data, agents, options);
}

TrainRun train(const TrainerConfig& config, Agents agents, const TrainOptions& options) {
    validate(config);
    const TrainData data = prepare_data(config);
    return run_loop(start_run(config, data), data, agents, options);
}

TrainRun train_or_resume(const TrainerConfig& config, Agents agents, const TrainOptions& options) {
    if (!config.checkpoint_dir.empty()) {
        if (auto existing = CheckpointStore(config.checkpoint_dir).load_latest()) {
            return resume(*std::move(existing), agents, options);
        }
    }
    return train(config, agents, options);
}

RunSummary summarize(const TrainRun& run) {
    RunSummary summary;
    summary.final_prompt = run.current_prompt;
    summary.final_train_accuracy = run.final_train_accuracy;
    for (const auto& e : run.epochs) {
        if (e.test_accuracy &&
            (!summary.best_test_accuracy || compare(*e.test_accuracy, *summary.best_test_accuracy) > 0)) {
            summary.best_test_accuracy = e.test_accuracy;
            summary.best_test_epoch = e.epoch;
        }
    }
    return summary;
}

}  // namespace spt
