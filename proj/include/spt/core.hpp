#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spt {

// Exact signed rational, always stored reduced with a positive denominator.
class Fraction {
public:
    Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Fraction operator+(const Fraction& a, const Fraction& b);
    friend Fraction operator-(const Fraction& a, const Fraction& b);
    friend bool operator==(const Fraction& a, const Fraction& b) = default;
    friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

// Rounds to at most `max_places` decimals (half away from zero) and drops
// trailing zeros: 1/5 -> "0.2", -1/20 -> "-0.05", 1 -> "1".
std::string format_decimal(const Fraction& value, int max_places = 2);

// Accuracy kept as raw counts so that differences and ties are exact.
struct Accuracy {
    std::int64_t correct = 0;
    std::int64_t total = 0;

    Fraction value() const;
    friend bool operator==(const Accuracy&, const Accuracy&) = default;
};

// Compares by value, not by counts: 1/2 and 2/4 are equal.
std::strong_ordering compare(const Accuracy& a, const Accuracy& b);

struct McqItem {
    std::string id;
    std::string question;
    std::vector<std::string> choices;
    int answer_index = 0;

    friend bool operator==(const McqItem&, const McqItem&) = default;
};

// Throws ValidationError naming the item id on the first violated invariant.
void validate(const McqItem& item);

enum class OriginKind { initial, corrector_candidate, corrector_self_update };

struct PromptOrigin {
    OriginKind kind = OriginKind::initial;
    int epoch = -1;
    int candidate_index = -1;

    static PromptOrigin initial() { return {}; }
    static PromptOrigin candidate(int epoch, int index) { return {OriginKind::corrector_candidate, epoch, index}; }
    static PromptOrigin self_update(int epoch) { return {OriginKind::corrector_self_update, epoch, -1}; }

    friend bool operator==(const PromptOrigin&, const PromptOrigin&) = default;
};

// Prompt text plus its derived sentence segmentation. Text is kept verbatim.
class MetaPrompt {
public:
    MetaPrompt() = default;
    explicit MetaPrompt(std::string text, PromptOrigin origin = {});

    const std::string& text() const noexcept { return text_; }
    const std::vector<std::string>& sentences() const noexcept { return sentences_; }
    const PromptOrigin& origin() const noexcept { return origin_; }
    bool empty() const noexcept { return sentences_.empty(); }

    friend bool operator==(const MetaPrompt& a, const MetaPrompt& b) {
        return a.text_ == b.text_ && a.origin_ == b.origin_;
    }

private:
    std::string text_;
    std::vector<std::string> sentences_;
    PromptOrigin origin_;
};

// Sentinel for an answer that could not be mapped to any choice.
inline constexpr int kNoValidChoice = -1;

struct Mistake {
    McqItem item;
    int given_index = kNoValidChoice;
    std::string given_text;

    friend bool operator==(const Mistake&, const Mistake&) = default;
};

struct ItemOutcome {
    std::string item_id;
    int given_index = kNoValidChoice;
    bool correct = false;

    friend bool operator==(const ItemOutcome&, const ItemOutcome&) = default;
};

struct EvalResult {
    std::string prompt_text;
    std::vector<ItemOutcome> per_item;
    Accuracy accuracy;
    std::vector<Mistake> mistakes;
};

enum class EvalScope { mistake_set, train_set };

struct ImpactEntry {
    std::string sentence;
    Fraction impact;
    Accuracy acc_before;
    Accuracy acc_after;
    int epoch = 0;
    EvalScope scope = EvalScope::mistake_set;

    friend bool operator==(const ImpactEntry&, const ImpactEntry&) = default;
};

ImpactEntry make_impact_entry(std::string sentence, Accuracy before, Accuracy after, int epoch, EvalScope scope);

class ImpactLedger {
public:
    // Rejects entries whose impact is not exactly after - before.
    void add(ImpactEntry entry);

    const std::vector<ImpactEntry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    // Most recent score recorded for a sentence.
    std::optional<Fraction> latest(std::string_view sentence) const;

    // One (sentence, latest impact) pair per distinct sentence, in order of first appearance.
    std::vector<std::pair<std::string, Fraction>> latest_by_sentence() const;

    friend bool operator==(const ImpactLedger&, const ImpactLedger&) = default;

private:
    std::vector<ImpactEntry> entries_;
};

// Splits on '.', '!' or '?' followed by whitespace or end of text. Each
// sentence is trimmed with internal whitespace runs collapsed to one space.
std::vector<std::string> segment_sentences(std::string_view text);

std::string join_sentences(std::span<const std::string> sentences);

// join_sentences(segment_sentences(text)).
std::string normalize_prompt(std::string_view text);

// Tags every sentence that has a ledger score: "<s>"; impact score: <v>.
// Returns the prompt text untouched when nothing matches.
std::string annotate_with_impact(const MetaPrompt& prompt, const ImpactLedger& ledger);

// {"sentence":0.2,"other":-0.05}, or {} for an empty ledger.
std::string render_impact_map(const ImpactLedger& ledger);

}  // namespace spt
