#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "spt/backend.hpp"
#include "spt/checkpoint.hpp"
#include "spt/corrector.hpp"
#include "spt/datasets.hpp"
#include "spt/error.hpp"
#include "spt/generator.hpp"
#include "spt/mock_backend.hpp"
#include "spt/serialization.hpp"
#include "spt/trainer.hpp"

namespace spt::cli {

std::atomic<bool>& abort_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace {

struct BackendFlags {
    std::string kind = "mock";
    std::string mock_script;
    std::string endpoint = "https://api.openai.com";
    std::string model = "gpt-4";
    std::string api_key_env = "OPENAI_API_KEY";
    int max_retries = 3;
    int timeout_ms = 120'000;
    int max_in_flight = 8;
};

struct CorrectorFlags {
    std::string kind;
    std::string mock_script;
    std::string endpoint;
    std::string model;
    double temperature = 1.0;
};

BackendKind parse_kind(const std::string& kind) {
    if (kind == "mock") return BackendKind::scripted_mock;
    if (kind == "http") return BackendKind::http_openai_compatible;
    throw ConfigError("unknown backend '" + kind + "' (expected mock or http)");
}

BackendConfig generator_config(const BackendFlags& f) {
    BackendConfig c;
    c.kind = parse_kind(f.kind);
    c.mock_script_path = f.mock_script;
    c.endpoint = f.endpoint;
    c.model = f.model;
    c.api_key_env = f.api_key_env;
    c.max_retries = f.max_retries;
    c.timeout = std::chrono::milliseconds(f.timeout_ms);
    c.max_in_flight = f.max_in_flight;
    c.temperature = 0.0;
    return c;
}

BackendConfig corrector_config(const BackendFlags& g, const CorrectorFlags& f) {
    BackendConfig c = generator_config(g);
    if (!f.kind.empty()) c.kind = parse_kind(f.kind);
    if (!f.mock_script.empty()) c.mock_script_path = f.mock_script;
    if (!f.endpoint.empty()) c.endpoint = f.endpoint;
    if (!f.model.empty()) c.model = f.model;
    c.temperature = f.temperature;
    return c;
}

void add_backend_flags(CLI::App& cmd, BackendFlags& f) {
    cmd.add_option("--backend", f.kind, "Generator backend: mock or http")->capture_default_str();
    cmd.add_option("--mock-script", f.mock_script, "Mock script JSON for the mock backend");
    cmd.add_option("--endpoint", f.endpoint, "Base URL of an OpenAI-compatible server")->capture_default_str();
    cmd.add_option("--model", f.model, "Generator model name")->capture_default_str();
    cmd.add_option("--api-key-env", f.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    cmd.add_option("--max-retries", f.max_retries, "Retries on transport errors, 429 and 5xx")
        ->capture_default_str();
    cmd.add_option("--timeout-ms", f.timeout_ms, "Per-request timeout")->capture_default_str();
    cmd.add_option("--max-in-flight", f.max_in_flight, "Concurrent HTTP requests per agent")->capture_default_str();
}

std::string fmt_acc(const Accuracy& a) {
    return format_decimal(a.value(), 4);
}

std::string fmt_acc(const std::optional<Accuracy>& a) {
    return a ? fmt_acc(*a) : "-";
}

// Keeps answers recorded from the generator and completions from the corrector.
void merge_into(MockScript& into, const MockScript& from) {
    for (const auto& [fp, answers] : from.answers) {
        auto& dst = into.answers[fp];
        dst.prompt = answers.prompt;
        for (const auto& [id, reply] : answers.replies) {
            dst.replies[id] = reply;
        }
    }
    for (const auto& [fp, responses] : from.completions) {
        into.completions[fp] = responses;
    }
}

void print_epoch(std::ostream& out, const EpochRecord& e) {
    std::string accs;
    for (const auto& c : e.candidates) {
        if (!accs.empty()) accs += ",";
        accs += fmt_acc(c.mistake_accuracy);
    }
    out << e.epoch << '\t' << fmt_acc(e.train_accuracy) << '\t' << (accs.empty() ? "-" : accs) << '\t'
        << (e.selected_index ? std::to_string(*e.selected_index) : "-") << '\t' << fmt_acc(e.test_accuracy) << '\t'
        << e.next_prompt.text().size() << '\n';
    out.flush();
}

struct TrainFlags {
    std::string dataset;
    std::string test_dataset;
    std::string variant = "spt-p";
    int candidates = 3;
    int epochs = 5;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::string initial_prompt;
    std::string initial_corrector = std::string(kInitialCorrectorPrompt);
    std::string impact_scope = "mistake_set";
    bool track_impact = false;
    bool no_test_eval = false;
    std::string out;
    bool resume = false;
    std::string record;
    int parallelism = 0;
    int reask = 1;
    BackendFlags gen;
    CorrectorFlags corr;
};

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
    TrainerConfig config;
    config.variant = variant_from_string(f.variant);
    config.n_candidates = f.candidates;
    config.max_epochs = f.epochs;
    config.dataset_path = f.dataset;
    config.test_dataset_path = f.test_dataset;
    config.train_fraction = f.train_fraction;
    config.split_seed = f.seed;
    config.generator = generator_config(f.gen);
    config.generator.reask_limit = f.reask;
    config.corrector = corrector_config(f.gen, f.corr);
    config.initial_prompt = f.initial_prompt;
    config.initial_corrector = f.initial_corrector;
    config.evaluate_test_each_epoch = !f.no_test_eval;
    config.impact_scope = eval_scope_from_string(f.impact_scope);
    config.track_impact = f.track_impact;
    config.checkpoint_dir = f.out;
    config.eval_parallelism = f.parallelism;
    validate(config);

    auto generator = make_backend(config.generator);
    auto corrector = make_backend(config.corrector);
    std::optional<RecordingBackend> gen_rec;
    std::optional<RecordingBackend> corr_rec;
    ChatBackend* gen = generator.get();
    ChatBackend* corr = corrector.get();
    if (!f.record.empty()) {
        gen = &gen_rec.emplace(*generator);
        corr = &corr_rec.emplace(*corrector);
    }

    TrainOptions options;
    options.abort = &abort_flag();
    options.on_epoch = [&](const EpochRecord& e) { print_epoch(out, e); };

    out << "epoch\ttrain_acc\tcandidate_accs\tselected\ttest_acc\tprompt_len\n";
    auto save_recording = [&] {
        if (!f.record.empty()) {
            MockScript script = gen_rec->script();
            merge_into(script, corr_rec->script());
            script.save(f.record);
        }
    };
    TrainRun run;
    try {
        run = f.resume ? train_or_resume(config, {*gen, *corr}, options) : train(config, {*gen, *corr}, options);
    } catch (...) {
        save_recording();
        throw;
    }
    save_recording();

    const RunSummary summary = summarize(run);
    out << "\nstatus\t" << to_string(run.status) << '\n';
    out << "epochs\t" << run.epochs.size() << '\n';
    out << "final_train_acc\t" << fmt_acc(summary.final_train_accuracy) << '\n';
    out << "best_test_acc\t" << fmt_acc(summary.best_test_accuracy) << '\t'
        << (summary.best_test_epoch ? std::to_string(*summary.best_test_epoch) : "-") << '\n';
    if (!f.out.empty()) {
        err << "checkpoints written to " << f.out << '\n';
    }
    return kOk;
}

struct EvalFlags {
    std::string dataset;
    std::string prompt;
    bool prompt_given = false;
    std::string checkpoint;
    bool compare_initial = false;
    std::string csv;
    int parallelism = 0;
    int reask = 1;
    BackendFlags gen;
};

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
    if (f.prompt_given == !f.checkpoint.empty()) {
        throw ConfigError("give exactly one of --prompt or --checkpoint");
    }
    if (f.compare_initial && f.checkpoint.empty()) {
        throw ConfigError("--compare-initial needs --checkpoint");
    }
    const auto items = load_dataset(f.dataset);
    if (items.empty()) {
        throw ConfigError("dataset " + f.dataset + " holds no items");
    }

    std::vector<std::pair<std::string, MetaPrompt>> rows;
    if (f.prompt_given) {
        rows.emplace_back("prompt", MetaPrompt(f.prompt));
    } else {
        const TrainRun run = load_run(f.checkpoint);
        if (f.compare_initial) {
            rows.emplace_back("initial", MetaPrompt(run.config.initial_prompt));
        }
        rows.emplace_back("final", run.current_prompt);
    }

    BackendConfig config = generator_config(f.gen);
    config.reask_limit = f.reask;
    auto backend = make_backend(config);
    const EvalOptions options{f.parallelism, f.reask};

    std::ofstream csv;
    if (!f.csv.empty()) {
        csv.open(f.csv);
        if (!csv) {
            throw ConfigError("cannot write " + f.csv);
        }
        csv << "label,item_id,given_index,correct\n";
    }
    out << "label\taccuracy\tcorrect\ttotal\n";
    for (const auto& [label, prompt] : rows) {
        const EvalResult result = evaluate(*backend, prompt, items, options);
        out << label << '\t' << fmt_acc(result.accuracy) << '\t' << result.accuracy.correct << '\t'
            << result.accuracy.total << '\n';
        if (csv.is_open()) {
            for (const auto& o : result.per_item) {
                csv << label << ',' << o.item_id << ',' << o.given_index << ',' << (o.correct ? 1 : 0) << '\n';
            }
        }
    }
    if (!f.csv.empty()) {
        err << "per-item results written to " << f.csv << '\n';
    }
    return kOk;
}

int cmd_impact_report(const std::string& checkpoint, std::ostream& out) {
    const TrainRun run = load_run(checkpoint);
    out << annotate_with_impact(run.current_prompt, run.ledger) << "\n\n";
    std::vector<ImpactEntry> entries = run.ledger.entries();
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ImpactEntry& a, const ImpactEntry& b) { return a.impact > b.impact; });
    out << "impact\tepoch\tscope\tsentence\n";
    for (const auto& e : entries) {
        out << format_decimal(e.impact) << '\t' << e.epoch << '\t' << to_string(e.scope) << '\t' << e.sentence
            << '\n';
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supervisory prompt training for multiple-choice tasks"};
    app.set_config("--config", "", "TOML config file; command-line flags override it");
    app.require_subcommand(1);

    TrainFlags tf;
    auto* train_cmd = app.add_subcommand("train", "Train a generator meta-prompt");
    train_cmd->add_option("--dataset", tf.dataset, "JSONL dataset")->required();
    train_cmd->add_option("--test-dataset", tf.test_dataset, "Separate JSONL test set (disables the split)");
    train_cmd->add_option("--variant", tf.variant, "spt-p | spt-pc | spt-cot | spt-imp")->capture_default_str();
    train_cmd->add_option("--candidates", tf.candidates, "Candidate prompts per epoch")->capture_default_str();
    train_cmd->add_option("--epochs", tf.epochs, "Maximum epochs")->capture_default_str();
    train_cmd->add_option("--train-fraction", tf.train_fraction, "Share of items used for training")
        ->capture_default_str();
    train_cmd->add_option("--seed", tf.seed, "Split seed")->capture_default_str();
    train_cmd->add_option("--initial-prompt", tf.initial_prompt, "Initial generator prompt (default empty)");
    train_cmd->add_option("--initial-corrector", tf.initial_corrector, "Initial corrector prompt");
    train_cmd->add_option("--impact-scope", tf.impact_scope, "mistake_set or train_set")->capture_default_str();
    train_cmd->add_flag("--track-impact", tf.track_impact, "Compute impact scores for every variant");
    train_cmd->add_flag("--no-test-eval", tf.no_test_eval, "Skip per-epoch test evaluation");
    train_cmd->add_option("--out", tf.out, "Checkpoint directory");
    train_cmd->add_flag("--resume", tf.resume, "Continue from the checkpoint in --out if present");
    train_cmd->add_option("--record", tf.record, "Write every exchange to this mock script");
    train_cmd->add_option("--parallelism", tf.parallelism, "Concurrent items per evaluation (0 = backend default)");
    train_cmd->add_option("--reask", tf.reask, "Extra number prompts for unparseable answers")
        ->capture_default_str();
    add_backend_flags(*train_cmd, tf.gen);
    train_cmd->add_option("--corrector-backend", tf.corr.kind, "Corrector backend (default: --backend)");
    train_cmd->add_option("--corrector-mock-script", tf.corr.mock_script, "Corrector mock script");
    train_cmd->add_option("--corrector-endpoint", tf.corr.endpoint, "Corrector base URL");
    train_cmd->add_option("--corrector-model", tf.corr.model, "Corrector model name");
    train_cmd->add_option("--corrector-temperature", tf.corr.temperature, "Corrector sampling temperature")
        ->capture_default_str();

    EvalFlags ef;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a prompt on a dataset");
    eval_cmd->add_option("--dataset", ef.dataset, "JSONL dataset")->required();
    auto* prompt_opt = eval_cmd->add_option("--prompt", ef.prompt, "Literal prompt text");
    eval_cmd->add_option("--checkpoint", ef.checkpoint, "Checkpoint file or directory");
    eval_cmd->add_flag("--compare-initial", ef.compare_initial, "Also evaluate the run's initial prompt");
    eval_cmd->add_option("--csv", ef.csv, "Per-item CSV output path");
    eval_cmd->add_option("--parallelism", ef.parallelism, "Concurrent items (0 = backend default)");
    eval_cmd->add_option("--reask", ef.reask, "Extra number prompts for unparseable answers");
    add_backend_flags(*eval_cmd, ef.gen);

    std::string impact_checkpoint;
    auto* impact_cmd = app.add_subcommand("impact-report", "Show a run's prompt with impact scores");
    impact_cmd->add_option("--checkpoint", impact_checkpoint, "Checkpoint file or directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }
    ef.prompt_given = prompt_opt->count() > 0;

    try {
        if (*train_cmd) return cmd_train(tf, out, err);
        if (*eval_cmd) return cmd_eval(ef, out, err);
        if (*impact_cmd) return cmd_impact_report(impact_checkpoint, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const BackendError& e) {
        err << "backend failure: " << e.what() << '\n';
        return kBackendFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

}  // namespace spt::cli
