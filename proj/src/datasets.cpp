#include "spt/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include <json.hpp>

#include "spt/error.hpp"
#include "spt/io.hpp"

namespace spt {

namespace {

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t r = rng();
    while (r < threshold) {
        r = rng();
    }
    return r % bound;
}

}  // namespace

std::vector<McqItem> parse_dataset(std::string_view jsonl, std::string_view source) {
    std::vector<McqItem> items;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        const std::size_t end = std::min(jsonl.find('\n', pos), jsonl.size());
        std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            continue;
        }
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        McqItem item;
        try {
            const auto doc = nlohmann::json::parse(line);
            item.id = doc.at("id").get<std::string>();
            item.question = doc.at("question").get<std::string>();
            item.choices = doc.at("choices").get<std::vector<std::string>>();
            item.answer_index = doc.at("answer_index").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        validate(item);
        if (!ids.insert(item.id).second) {
            throw ValidationError(where + ": duplicate id '" + item.id + "'");
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::vector<McqItem> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path), path.string());
}

std::size_t train_size(std::size_t n, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw PreconditionError("train_fraction must lie strictly between 0 and 1");
    }
    if (n < 2) {
        throw PreconditionError("too few items to split: need at least 2, got " + std::to_string(n));
    }
    // The epsilon absorbs binary representation error, e.g. 0.35 * 10.
    const auto rounded = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5 + 1e-9));
    return std::clamp<std::size_t>(rounded, 1, n - 1);
}

Split split_dataset(std::span<const McqItem> items, double train_fraction, std::uint64_t seed) {
    const std::size_t n_train = train_size(items.size(), train_fraction);
    std::vector<McqItem> shuffled(items.begin(), items.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i + 1));
        std::swap(shuffled[i], shuffled[j]);
    }
    Split split;
    split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
    return split;
}

}  // namespace spt
