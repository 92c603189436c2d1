#include "spt/serialization.hpp"

#include "spt/error.hpp"

namespace spt {

namespace {

std::string_view to_string(OriginKind kind) {
    switch (kind) {
    case OriginKind::initial: return "initial";
    case OriginKind::corrector_candidate: return "corrector_candidate";
    case OriginKind::corrector_self_update: return "corrector_self_update";
    }
    return "initial";
}

OriginKind origin_kind_from_string(std::string_view name) {
    if (name == "initial") return OriginKind::initial;
    if (name == "corrector_candidate") return OriginKind::corrector_candidate;
    if (name == "corrector_self_update") return OriginKind::corrector_self_update;
    throw ConfigError("unknown prompt origin '" + std::string(name) + "'");
}

std::string_view to_string(BackendKind kind) {
    return kind == BackendKind::http_openai_compatible ? "http" : "mock";
}

BackendKind backend_kind_from_string(std::string_view name) {
    if (name == "http") return BackendKind::http_openai_compatible;
    if (name == "mock") return BackendKind::scripted_mock;
    throw ConfigError("unknown backend kind '" + std::string(name) + "' (expected http or mock)");
}

RunStatus run_status_from_string(std::string_view name) {
    if (name == "running") return RunStatus::running;
    if (name == "completed") return RunStatus::completed;
    if (name == "aborted") return RunStatus::aborted;
    throw ConfigError("unknown run status '" + std::string(name) + "'");
}

template <typename T, typename F>
std::optional<T> optional_from(const Json& j, const char* key, F&& parse) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return parse(j.at(key));
}

}  // namespace

std::string_view to_string(EvalScope scope) {
    return scope == EvalScope::train_set ? "train_set" : "mistake_set";
}

EvalScope eval_scope_from_string(std::string_view name) {
    if (name == "mistake_set") return EvalScope::mistake_set;
    if (name == "train_set") return EvalScope::train_set;
    throw ConfigError("unknown impact scope '" + std::string(name) + "' (expected mistake_set or train_set)");
}

std::string_view to_string(RunStatus status) {
    switch (status) {
    case RunStatus::running: return "running";
    case RunStatus::completed: return "completed";
    case RunStatus::aborted: return "aborted";
    }
    return "running";
}

Json to_json(const Accuracy& a) {
    return Json{{"correct", a.correct}, {"total", a.total}};
}

Json to_json(const Fraction& f) {
    return Json{{"num", f.num()}, {"den", f.den()}};
}

Json to_json(const MetaPrompt& p) {
    return Json{{"text", p.text()},
                {"origin",
                 {{"kind", to_string(p.origin().kind)},
                  {"epoch", p.origin().epoch},
                  {"candidate_index", p.origin().candidate_index}}}};
}

Json to_json(const ImpactLedger& ledger) {
    Json entries = Json::array();
    for (const auto& e : ledger.entries()) {
        entries.push_back({{"sentence", e.sentence},
                           {"impact", to_json(e.impact)},
                           {"display", format_decimal(e.impact)},
                           {"acc_before", to_json(e.acc_before)},
                           {"acc_after", to_json(e.acc_after)},
                           {"epoch", e.epoch},
                           {"eval_scope", to_string(e.scope)}});
    }
    return Json{{"entries", std::move(entries)}};
}

Json to_json(const BackendConfig& c) {
    return Json{{"kind", to_string(c.kind)},
                {"endpoint", c.endpoint},
                {"path", c.path},
                {"model", c.model},
                {"temperature", c.temperature},
                {"max_retries", c.max_retries},
                {"timeout_ms", c.timeout.count()},
                {"initial_backoff_ms", c.initial_backoff.count()},
                {"api_key_env", c.api_key_env},
                {"max_in_flight", c.max_in_flight},
                {"mock_script", c.mock_script_path},
                {"reask_limit", c.reask_limit}};
}

Json to_json(const TrainerConfig& c) {
    return Json{{"variant", to_string(c.variant)},
                {"n_candidates", c.n_candidates},
                {"max_epochs", c.max_epochs},
                {"dataset", c.dataset_path},
                {"test_dataset", c.test_dataset_path},
                {"train_fraction", c.train_fraction},
                {"split_seed", c.split_seed},
                {"generator", to_json(c.generator)},
                {"corrector", to_json(c.corrector)},
                {"initial_prompt", c.initial_prompt},
                {"initial_corrector", c.initial_corrector},
                {"evaluate_test_each_epoch", c.evaluate_test_each_epoch},
                {"impact_scope", to_string(c.impact_scope)},
                {"track_impact", c.track_impact},
                {"checkpoint_dir", c.checkpoint_dir},
                {"eval_parallelism", c.eval_parallelism}};
}

Json to_json(const EpochRecord& r) {
    Json candidates = Json::array();
    for (const auto& c : r.candidates) {
        candidates.push_back({{"prompt", to_json(c.prompt)},
                              {"mistake_accuracy", to_json(c.mistake_accuracy)},
                              {"marker_missing", c.marker_missing}});
    }
    return Json{{"epoch", r.epoch},
                {"prompt", to_json(r.prompt)},
                {"corrector", to_json(r.corrector)},
                {"train_accuracy", to_json(r.train_accuracy)},
                {"mistake_ids", r.mistake_ids},
                {"unparseable", r.unparseable},
                {"terminal", r.terminal},
                {"candidates", std::move(candidates)},
                {"selected_index", r.selected_index ? Json(*r.selected_index) : Json()},
                {"stalled", r.stalled},
                {"next_prompt", to_json(r.next_prompt)},
                {"repeated_mistake_ids", r.repeated_mistake_ids},
                {"corrector_updated", r.corrector_updated},
                {"next_corrector", to_json(r.next_corrector)},
                {"test_accuracy", r.test_accuracy ? to_json(*r.test_accuracy) : Json()}};
}

Json to_json(const TrainRun& run) {
    Json epochs = Json::array();
    for (const auto& e : run.epochs) {
        epochs.push_back(to_json(e));
    }
    return Json{{"schema", kCheckpointSchema},
                {"status", to_string(run.status)},
                {"seed", run.seed},
                {"config", to_json(run.config)},
                {"train_ids", run.train_ids},
                {"test_ids", run.test_ids},
                {"epochs", std::move(epochs)},
                {"ledger", to_json(run.ledger)},
                {"current_prompt", to_json(run.current_prompt)},
                {"current_corrector", to_json(run.current_corrector)},
                {"final_train_accuracy", run.final_train_accuracy ? to_json(*run.final_train_accuracy) : Json()}};
}

Accuracy accuracy_from_json(const Json& j) {
    return Accuracy{j.at("correct").get<std::int64_t>(), j.at("total").get<std::int64_t>()};
}

Fraction fraction_from_json(const Json& j) {
    return Fraction(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

MetaPrompt prompt_from_json(const Json& j) {
    const auto& o = j.at("origin");
    PromptOrigin origin{origin_kind_from_string(o.at("kind").get<std::string>()), o.at("epoch").get<int>(),
                        o.at("candidate_index").get<int>()};
    return MetaPrompt(j.at("text").get<std::string>(), origin);
}

ImpactLedger ledger_from_json(const Json& j) {
    ImpactLedger ledger;
    for (const auto& e : j.at("entries")) {
        ImpactEntry entry{e.at("sentence").get<std::string>(),
                          fraction_from_json(e.at("impact")),
                          accuracy_from_json(e.at("acc_before")),
                          accuracy_from_json(e.at("acc_after")),
                          e.at("epoch").get<int>(),
                          eval_scope_from_string(e.at("eval_scope").get<std::string>())};
        ledger.add(std::move(entry));
    }
    return ledger;
}

BackendConfig backend_config_from_json(const Json& j) {
    BackendConfig c;
    c.kind = backend_kind_from_string(j.value("kind", "mock"));
    c.endpoint = j.value("endpoint", c.endpoint);
    c.path = j.value("path", c.path);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", c.timeout.count()));
    c.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", c.initial_backoff.count()));
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.mock_script_path = j.value("mock_script", c.mock_script_path);
    c.reask_limit = j.value("reask_limit", c.reask_limit);
    return c;
}

TrainerConfig trainer_config_from_json(const Json& j) {
    TrainerConfig c;
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.n_candidates = j.at("n_candidates").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.dataset_path = j.at("dataset").get<std::string>();
    c.test_dataset_path = j.value("test_dataset", "");
    c.train_fraction = j.at("train_fraction").get<double>();
    c.split_seed = j.at("split_seed").get<std::uint64_t>();
    c.generator = backend_config_from_json(j.at("generator"));
    c.corrector = backend_config_from_json(j.at("corrector"));
    c.initial_prompt = j.at("initial_prompt").get<std::string>();
    c.initial_corrector = j.at("initial_corrector").get<std::string>();
    c.evaluate_test_each_epoch = j.at("evaluate_test_each_epoch").get<bool>();
    c.impact_scope = eval_scope_from_string(j.at("impact_scope").get<std::string>());
    c.track_impact = j.value("track_impact", false);
    c.checkpoint_dir = j.value("checkpoint_dir", "");
    c.eval_parallelism = j.value("eval_parallelism", 0);
    return c;
}

EpochRecord epoch_from_json(const Json& j) {
    EpochRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.prompt = prompt_from_json(j.at("prompt"));
    r.corrector = prompt_from_json(j.at("corrector"));
    r.train_accuracy = accuracy_from_json(j.at("train_accuracy"));
    r.mistake_ids = j.at("mistake_ids").get<std::vector<std::string>>();
    r.unparseable = j.at("unparseable").get<int>();
    r.terminal = j.at("terminal").get<bool>();
    for (const auto& c : j.at("candidates")) {
        r.candidates.push_back({prompt_from_json(c.at("prompt")), accuracy_from_json(c.at("mistake_accuracy")),
                                c.at("marker_missing").get<bool>()});
    }
    r.selected_index = optional_from<int>(j, "selected_index", [](const Json& v) { return v.get<int>(); });
    r.stalled = j.at("stalled").get<bool>();
    r.next_prompt = prompt_from_json(j.at("next_prompt"));
    r.repeated_mistake_ids = j.at("repeated_mistake_ids").get<std::vector<std::string>>();
    r.corrector_updated = j.at("corrector_updated").get<bool>();
    r.next_corrector = prompt_from_json(j.at("next_corrector"));
    r.test_accuracy = optional_from<Accuracy>(j, "test_accuracy", accuracy_from_json);
    return r;
}

TrainRun train_run_from_json(const Json& j) {
    try {
        if (j.at("schema").get<int>() != kCheckpointSchema) {
            throw ConfigError("unsupported checkpoint schema " + j.at("schema").dump());
        }
        TrainRun run;
        run.status = run_status_from_string(j.at("status").get<std::string>());
        run.seed = j.at("seed").get<std::uint64_t>();
        run.config = trainer_config_from_json(j.at("config"));
        run.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        run.test_ids = j.at("test_ids").get<std::vector<std::string>>();
        for (const auto& e : j.at("epochs")) {
            run.epochs.push_back(epoch_from_json(e));
        }
        run.ledger = ledger_from_json(j.at("ledger"));
        run.current_prompt = prompt_from_json(j.at("current_prompt"));
        run.current_corrector = prompt_from_json(j.at("current_corrector"));
        run.final_train_accuracy = optional_from<Accuracy>(j, "final_train_accuracy", accuracy_from_json);
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("inconsistent checkpoint: ") + e.what());
    }
}

}  // namespace spt
