#include "spt/corrector.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <set>
#include <thread>

#include "spt/error.hpp"

namespace spt {

namespace {

// Corrector instructions. Placeholders are substituted by the builders below.

constexpr std::string_view kImprovePrompt =
    "Here is a list of questions, answers generated by an LLM and the correct answers. Next, you have the "
    "meta-prompt of the LLM. The LLM made mistakes on these questions because of this meta-prompt. Generate an "
    "excellent meta-prompt for the LLM so it can find the correct answer for all the questions. You must "
    "understand every single question, with every single wrong answer given by the other LLM, and understand why "
    "the other LLM answered with a wrong answer. You must pay attention to all the questions' topics and you must "
    "ensure the new meta-prompt clearly explains how the LLM should go about answering all the questions about "
    "those topics correctly. You must also keep the important ideas in the current meta-prompt intact. Only "
    "output the new meta prompt preceded by 'New prompt: '. List of questions: {{List of questions}}; Original "
    "LLM meta prompt: {{p_i}}.";

constexpr std::string_view kImpactHistory =
    " Here is a history of sentences and how they impacted the correctness of the LLM out of 1. You must use "
    "this information to create a better prompt for the LLM.: {{impact scores}}";

constexpr std::string_view kImprovePromptStepByStep =
    "Here is a list of questions, answers generated by an LLM and the correct answers. Next, you have the meta "
    "prompt of the LLM. The LLM made mistakes on these questions because of this meta-prompt. First, do a "
    "step-by-step reasoning on all the problems with the current prompt that made the LLM fail at finding the "
    "right answers. You must understand every single question, with every single wrong answer given by the other "
    "LLM, and understand why the other LLM answered with a wrong answer. Then, generate an excellent meta prompt "
    "that resolves all those problems. You must pay attention to all the questions' topics. Output the new meta "
    "prompt preceded by 'New prompt: '. List of questions: {{List of questions}}; Original LLM meta-prompt: "
    "{{p_i}}";

constexpr std::string_view kImproveCorrector =
    "You generate better meta-prompts for other LLMs, and these new meta-prompts solve all the mistakes of the "
    "LLM. You accomplished it for other LLMs using your meta-prompt c_0: {{c_i}}. However, the initial "
    "meta-prompt of an LLM p_0: \"{{p_i}}\" and the new meta-prompt p*: \"{{p_i*}}\" that you generated made "
    "mistakes on the same questions: {{m_pi}}. Generate a new meta-prompt for yourself that is better than c_0, "
    "that must create better meta-prompts than p* in the future. You must ensure that the new meta-prompt "
    "strongly emphasizes your ability to create better meta-prompts for other LLMs, taking into account the "
    "aforementioned mistakes. Only output the new meta prompt preceded by 'New prompt:";

constexpr std::string_view kImproveCorrectorWithImpact =
    "You generate better meta-prompts for other LLMs, and these new meta-prompts solve all the mistakes of the "
    "LLM. You accomplished it for other LLMs using your meta-prompt c_0: {{c_i}}. Here are the impact scores of "
    "each sentence in another LLM's meta-prompt out of 1: {{impact scores}} Generate a new meta-prompt for "
    "yourself that is better than c_0 and must create sentences with higher impact scores than the ones "
    "mentioned above. Your new meta-prompt should allow you to generate meta-prompts that have sentences that "
    "have a high impact score. Only output the new meta-prompt preceded by 'New prompt:";

constexpr std::string_view kMarker = "new prompt:";

// Single left-to-right pass so substituted text is never re-scanned.
std::string substitute(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string_view>> vars) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool replaced = false;
        if (tmpl.compare(i, 2, "{{") == 0) {
            for (const auto& [name, value] : vars) {
                const std::string token = "{{" + std::string(name) + "}}";
                if (tmpl.compare(i, token.size(), token) == 0) {
                    out += value;
                    i += token.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) {
            out.push_back(tmpl[i++]);
        }
    }
    return out;
}

std::string choice_line(const McqItem& item, int index) {
    if (index == kNoValidChoice) {
        return "no valid choice";
    }
    return std::to_string(index + 1) + ". " + item.choices[static_cast<std::size_t>(index)];
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t rfind_marker(std::string_view text) {
    if (text.size() < kMarker.size()) {
        return std::string_view::npos;
    }
    for (std::size_t pos = text.size() - kMarker.size() + 1; pos-- > 0;) {
        bool match = true;
        for (std::size_t j = 0; j < kMarker.size() && match; ++j) {
            match = std::tolower(static_cast<unsigned char>(text[pos + j])) == kMarker[j];
        }
        if (match) {
            return pos;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::string_view to_string(Variant variant) {
    switch (variant) {
    case Variant::spt_p: return "spt-p";
    case Variant::spt_pc: return "spt-pc";
    case Variant::spt_cot: return "spt-cot";
    case Variant::spt_imp: return "spt-imp";
    }
    return "spt-p";
}

Variant variant_from_string(std::string_view name) {
    for (Variant v : {Variant::spt_p, Variant::spt_pc, Variant::spt_cot, Variant::spt_imp}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    throw ConfigError("unknown variant '" + std::string(name) + "' (expected spt-p, spt-pc, spt-cot or spt-imp)");
}

bool updates_corrector(Variant variant) {
    return variant == Variant::spt_pc || variant == Variant::spt_imp;
}

std::string render_mistakes(std::span<const Mistake> mistakes) {
    std::string out = "\n";
    for (std::size_t m = 0; m < mistakes.size(); ++m) {
        const auto& mistake = mistakes[m];
        if (m > 0) {
            out += "\n";
        }
        out += "Question: " + mistake.item.question + "\n";
        for (std::size_t i = 0; i < mistake.item.choices.size(); ++i) {
            out += std::to_string(i + 1) + ". " + mistake.item.choices[i] + "\n";
        }
        out += "LLM answer: " + choice_line(mistake.item, mistake.given_index) + "\n";
        out += "Correct answer: " + choice_line(mistake.item, mistake.item.answer_index) + "\n";
    }
    return out;
}

std::vector<ChatMessage> build_p_update_request(Variant variant, const MetaPrompt& corrector,
                                                const MetaPrompt& prompt, std::span<const Mistake> mistakes,
                                                const ImpactLedger* ledger) {
    if (mistakes.empty()) {
        throw PreconditionError("p-update needs at least one mistake");
    }
    const std::string list = render_mistakes(mistakes);
    std::string user;
    switch (variant) {
    case Variant::spt_p:
    case Variant::spt_pc:
        user = substitute(kImprovePrompt, {{"List of questions", list}, {"p_i", prompt.text()}});
        break;
    case Variant::spt_cot:
        user = substitute(kImprovePromptStepByStep, {{"List of questions", list}, {"p_i", prompt.text()}});
        break;
    case Variant::spt_imp: {
        if (ledger == nullptr) {
            throw PreconditionError("spt-imp p-update needs an impact ledger");
        }
        const std::string annotated = annotate_with_impact(prompt, *ledger);
        const std::string impacts = render_impact_map(*ledger);
        user = substitute(kImprovePrompt, {{"List of questions", list}, {"p_i", annotated}});
        user += substitute(kImpactHistory, {{"impact scores", impacts}});
        break;
    }
    }
    return {{Role::system, corrector.text()}, {Role::user, std::move(user)}};
}

std::vector<ChatMessage> build_c_update_request(Variant variant, const MetaPrompt& corrector,
                                                const MetaPrompt& prompt, const MetaPrompt& selected,
                                                std::span<const Mistake> repeated_mistakes,
                                                const ImpactLedger* ledger) {
    std::string user;
    switch (variant) {
    case Variant::spt_pc: {
        if (repeated_mistakes.empty()) {
            throw PreconditionError("spt-pc c-update needs at least one repeated mistake");
        }
        const std::string list = render_mistakes(repeated_mistakes);
        user = substitute(kImproveCorrector, {{"c_i", corrector.text()},
                                              {"p_i", prompt.text()},
                                              {"p_i*", selected.text()},
                                              {"m_pi", list}});
        break;
    }
    case Variant::spt_imp: {
        if (ledger == nullptr) {
            throw PreconditionError("spt-imp c-update needs an impact ledger");
        }
        const std::string impacts = render_impact_map(*ledger);
        user = substitute(kImproveCorrectorWithImpact, {{"c_i", corrector.text()}, {"impact scores", impacts}});
        break;
    }
    default:
        throw PreconditionError("variant " + std::string(to_string(variant)) + " does not update the corrector");
    }
    return {{Role::system, corrector.text()}, {Role::user, std::move(user)}};
}

ParsedPrompt parse_new_prompt(std::string_view response) {
    ParsedPrompt parsed;
    std::string_view body = response;
    if (const auto pos = rfind_marker(response); pos != std::string_view::npos) {
        body = response.substr(pos + kMarker.size());
    } else {
        parsed.marker_missing = true;
    }
    body = trim(body);
    if (body.size() >= 2 && (body.front() == '"' || body.front() == '\'') && body.back() == body.front()) {
        body = trim(body.substr(1, body.size() - 2));
    }
    if (body.empty()) {
        throw EmptyPromptError("corrector response contains no prompt text");
    }
    parsed.text = std::string(body);
    return parsed;
}

std::vector<Candidate> generate_candidates(ChatBackend& backend, Variant variant, const MetaPrompt& corrector,
                                           const MetaPrompt& prompt, std::span<const Mistake> mistakes, int n,
                                           int epoch, const ImpactLedger* ledger) {
    if (n < 1) {
        throw PreconditionError("n_candidates must be >= 1");
    }
    const auto request = build_p_update_request(variant, corrector, prompt, mistakes, ledger);

    const auto count = static_cast<std::size_t>(n);
    std::vector<std::string> replies(count);
    std::vector<std::exception_ptr> errors(count);
    {
        std::vector<std::jthread> pool;
        pool.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            pool.emplace_back([&, k] {
                try {
                    replies[k] = backend.complete(request, CallTag{CallPurpose::p_update, "", 0, static_cast<int>(k)});
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    std::vector<Candidate> out;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < count; ++k) {
        ParsedPrompt parsed;
        try {
            parsed = parse_new_prompt(replies[k]);
        } catch (const EmptyPromptError&) {
            continue;
        }
        std::string key = normalize_prompt(parsed.text);
        if (key.empty() || !seen.insert(std::move(key)).second) {
            continue;
        }
        out.push_back({MetaPrompt(std::move(parsed.text), PromptOrigin::candidate(epoch, static_cast<int>(k))),
                       parsed.marker_missing});
    }
    if (out.empty()) {
        throw AllCandidatesFailedError("none of the " + std::to_string(n) + " corrector replies held a usable prompt");
    }
    return out;
}

}  // namespace spt
