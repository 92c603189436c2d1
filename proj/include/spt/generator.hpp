#pragma once

#include <span>

#include "spt/backend.hpp"
#include "spt/core.hpp"

namespace spt {

struct EvalOptions {
    // Concurrent items; 0 defers to the backend's preference.
    int parallelism = 0;
    int reask_limit = 1;
};

// Answers every item under `prompt` and scores against the gold index.
// Unparseable replies count as mistakes with given_index = kNoValidChoice.
// Backend errors abort the whole evaluation; no partial result is returned.
EvalResult evaluate(ChatBackend& backend, const MetaPrompt& prompt, std::span<const McqItem> items,
                    const EvalOptions& options = {});

// evaluate() over the items embedded in a mistake set.
EvalResult evaluate_on_mistakes(ChatBackend& backend, const MetaPrompt& prompt, std::span<const Mistake> mistakes,
                                const EvalOptions& options = {});

}  // namespace spt
