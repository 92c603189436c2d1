#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spt/backend.hpp"
#include "spt/core.hpp"

namespace spt {

enum class Variant { spt_p, spt_pc, spt_cot, spt_imp };

// "spt-p", "spt-pc", "spt-cot", "spt-imp".
std::string_view to_string(Variant variant);
Variant variant_from_string(std::string_view name);

// spt_pc and spt_imp also rewrite the corrector's own prompt.
bool updates_corrector(Variant variant);

// Default corrector meta-prompt.
inline constexpr std::string_view kInitialCorrectorPrompt =
    "You are an AI expert. You can generate new meta-prompts for another LLM so that this LLM is better at "
    "answering questions.";

// One block per mistake:
//   Question: ...
//   1. ...
//   LLM answer: 2. ...
//   Correct answer: 1. ...
// Blocks are separated by a blank line, and the whole list starts and ends
// with a newline.
std::string render_mistakes(std::span<const Mistake> mistakes);

// [system = corrector prompt, user = the variant's prompt-improvement
// instructions]. spt_imp needs `ledger`; its prompt is shown with impact tags
// and the impact history is appended.
std::vector<ChatMessage> build_p_update_request(Variant variant, const MetaPrompt& corrector,
                                                const MetaPrompt& prompt, std::span<const Mistake> mistakes,
                                                const ImpactLedger* ledger = nullptr);

// Corrector self-update. spt_pc embeds the current and selected prompts with
// the mistakes both of them made; spt_imp embeds the impact history.
std::vector<ChatMessage> build_c_update_request(Variant variant, const MetaPrompt& corrector,
                                                const MetaPrompt& prompt, const MetaPrompt& selected,
                                                std::span<const Mistake> repeated_mistakes,
                                                const ImpactLedger* ledger = nullptr);

struct ParsedPrompt {
    std::string text;
    bool marker_missing = false;
};

// Text after the last case-insensitive "New prompt:", trimmed and with one
// pair of wrapping quotes removed. Without a marker the whole response is
// used and marker_missing is set. Throws EmptyPromptError if nothing is left.
ParsedPrompt parse_new_prompt(std::string_view response);

struct Candidate {
    MetaPrompt prompt;
    bool marker_missing = false;
};

// Issues n p-update requests (tagged with their request index), parses each
// reply, and drops empty and duplicate results. Order follows request index.
// Throws AllCandidatesFailedError when nothing survives.
std::vector<Candidate> generate_candidates(ChatBackend& backend, Variant variant, const MetaPrompt& corrector,
                                           const MetaPrompt& prompt, std::span<const Mistake> mistakes, int n,
                                           int epoch, const ImpactLedger* ledger = nullptr);

}  // namespace spt
