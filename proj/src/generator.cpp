#include "spt/generator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "spt/error.hpp"

namespace spt {

namespace {

int resolve_parallelism(const ChatBackend& backend, const EvalOptions& options, std::size_t items) {
    int p = options.parallelism > 0 ? options.parallelism : backend.preferred_parallelism();
    if (p <= 0) {
        p = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(p), items));
}

}  // namespace

EvalResult evaluate(ChatBackend& backend, const MetaPrompt& prompt, std::span<const McqItem> items,
                    const EvalOptions& options) {
    if (items.empty()) {
        throw PreconditionError("evaluate() needs at least one item");
    }

    std::vector<int> given(items.size(), kNoValidChoice);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= items.size()) {
                return;
            }
            try {
                given[i] = answer_mcq(backend, prompt.text(), items[i], options.reask_limit);
            } catch (const UnparseableAnswerError&) {
                given[i] = kNoValidChoice;
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed.store(true);
                return;
            }
        }
    };

    const int workers = resolve_parallelism(backend, options, items.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }

    EvalResult result;
    result.prompt_text = prompt.text();
    result.accuracy.total = static_cast<std::int64_t>(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const McqItem& item = items[i];
        const bool correct = given[i] == item.answer_index;
        result.per_item.push_back({item.id, given[i], correct});
        if (correct) {
            ++result.accuracy.correct;
        } else {
            const std::string text = given[i] == kNoValidChoice ? "no valid choice"
                                                                : item.choices[static_cast<std::size_t>(given[i])];
            result.mistakes.push_back({item, given[i], text});
        }
    }
    return result;
}

EvalResult evaluate_on_mistakes(ChatBackend& backend, const MetaPrompt& prompt, std::span<const Mistake> mistakes,
                                const EvalOptions& options) {
    if (mistakes.empty()) {
        throw PreconditionError("evaluate_on_mistakes() needs a non-empty mistake set");
    }
    std::vector<McqItem> items;
    items.reserve(mistakes.size());
    for (const auto& m : mistakes) {
        items.push_back(m.item);
    }
    return evaluate(backend, prompt, items, options);
}

}  // namespace spt
