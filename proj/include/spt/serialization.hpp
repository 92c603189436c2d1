#pragma once

#include <json.hpp>

#include "spt/core.hpp"
#include "spt/run.hpp"

namespace spt {

using Json = nlohmann::ordered_json;

inline constexpr int kCheckpointSchema = 1;

Json to_json(const Accuracy& a);
Json to_json(const Fraction& f);
Json to_json(const MetaPrompt& p);
Json to_json(const ImpactLedger& ledger);
Json to_json(const BackendConfig& config);
Json to_json(const TrainerConfig& config);
Json to_json(const EpochRecord& record);
// Full checkpoint document, tagged "schema": 1. Prompts are stored verbatim.
Json to_json(const TrainRun& run);

Accuracy accuracy_from_json(const Json& j);
Fraction fraction_from_json(const Json& j);
MetaPrompt prompt_from_json(const Json& j);
ImpactLedger ledger_from_json(const Json& j);
BackendConfig backend_config_from_json(const Json& j);
TrainerConfig trainer_config_from_json(const Json& j);
EpochRecord epoch_from_json(const Json& j);
// Throws ConfigError on malformed input or an unknown schema.
TrainRun train_run_from_json(const Json& j);

std::string_view to_string(EvalScope scope);
EvalScope eval_scope_from_string(std::string_view name);
std::string_view to_string(RunStatus status);

}  // namespace spt
