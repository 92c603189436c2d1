#include "spt/core.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <json.hpp>

#include "spt/error.hpp"

namespace spt {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw PreconditionError("fraction with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
}

Fraction operator+(const Fraction& a, const Fraction& b) {
    return Fraction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Fraction operator-(const Fraction& a, const Fraction& b) {
    return Fraction(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    return a.num_ * b.den_ <=> b.num_ * a.den_;
}

std::string format_decimal(const Fraction& value, int max_places) {
    std::int64_t scale = 1;
    for (int i = 0; i < max_places; ++i) {
        scale *= 10;
    }
    const std::int64_t mag = value.num() < 0 ? -value.num() : value.num();
    const std::int64_t scaled = (2 * mag * scale + value.den()) / (2 * value.den());
    if (scaled == 0) {
        return "0";
    }
    std::string out = value.num() < 0 ? "-" : "";
    out += std::to_string(scaled / scale);
    std::string frac = std::to_string(scaled % scale);
    frac.insert(0, static_cast<std::size_t>(max_places) - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') {
        frac.pop_back();
    }
    if (!frac.empty()) {
        out += "." + frac;
    }
    return out;
}

Fraction Accuracy::value() const {
    if (total <= 0) {
        throw PreconditionError("accuracy over an empty set");
    }
    return Fraction(correct, total);
}

std::strong_ordering compare(const Accuracy& a, const Accuracy& b) {
    return a.value() <=> b.value();
}

void validate(const McqItem& item) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("item '" + item.id + "': " + what);
    };
    if (item.id.empty()) {
        throw ValidationError("item with empty id");
    }
    if (item.choices.size() < 3 || item.choices.size() > 4) {
        fail("expected 3 or 4 choices, got " + std::to_string(item.choices.size()));
    }
    if (item.answer_index < 0 || item.answer_index >= static_cast<int>(item.choices.size())) {
        fail("answer_index " + std::to_string(item.answer_index) + " out of range");
    }
    std::set<std::string> seen;
    for (const auto& choice : item.choices) {
        if (!seen.insert(collapse_whitespace(choice)).second) {
            fail("duplicate choice '" + choice + "'");
        }
    }
}

MetaPrompt::MetaPrompt(std::string text, PromptOrigin origin)
    : text_(std::move(text)), sentences_(segment_sentences(text_)), origin_(origin) {}

ImpactEntry make_impact_entry(std::string sentence, Accuracy before, Accuracy after, int epoch, EvalScope scope) {
    return ImpactEntry{std::move(sentence), after.value() - before.value(), before, after, epoch, scope};
}

void ImpactLedger::add(ImpactEntry entry) {
    if (entry.impact != entry.acc_after.value() - entry.acc_before.value()) {
        throw PreconditionError("impact entry for '" + entry.sentence + "' is not acc_after - acc_before");
    }
    entries_.push_back(std::move(entry));
}

std::optional<Fraction> ImpactLedger::latest(std::string_view sentence) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
        if (it->sentence == sentence) {
            return it->impact;
        }
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, Fraction>> ImpactLedger::latest_by_sentence() const {
    std::vector<std::pair<std::string, Fraction>> out;
    for (const auto& entry : entries_) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == entry.sentence; });
        if (it == out.end()) {
            out.emplace_back(entry.sentence, entry.impact);
        } else {
            it->second = entry.impact;
        }
    }
    return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string sentence = collapse_whitespace(text.substr(start, end - start));
        if (!sentence.empty()) {
            out.push_back(std::move(sentence));
        }
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (is_terminator(text[i]) && (i + 1 == text.size() || is_space(text[i + 1]))) {
            flush(i + 1);
        }
    }
    flush(text.size());
    return out;
}

std::string join_sentences(std::span<const std::string> sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += s;
    }
    return out;
}

std::string normalize_prompt(std::string_view text) {
    return join_sentences(segment_sentences(text));
}

std::string annotate_with_impact(const MetaPrompt& prompt, const ImpactLedger& ledger) {
    std::vector<std::string> parts;
    bool any = false;
    for (const auto& sentence : prompt.sentences()) {
        if (auto score = ledger.latest(sentence)) {
            parts.push_back("\"" + sentence + "\"; impact score: " + format_decimal(*score));
            any = true;
        } else {
            parts.push_back(sentence);
        }
    }
    return any ? join_sentences(parts) : prompt.text();
}

std::string render_impact_map(const ImpactLedger& ledger) {
    std::string out = "{";
    bool first = true;
    for (const auto& [sentence, impact] : ledger.latest_by_sentence()) {
        if (!first) {
            out += ",";
        }
        first = false;
        out += nlohmann::json(sentence).dump() + ":" + format_decimal(impact);
    }
    out += "}";
    return out;
}

}  // namespace spt
