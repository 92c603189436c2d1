#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "spt/core.hpp"

namespace spt {

// One JSON object per line: {"id", "question", "choices", "answer_index"}.
// Blank lines are skipped. Throws ValidationError with the line number on a
// parse error, or the item id on an invariant violation or duplicate id.
std::vector<McqItem> load_dataset(const std::filesystem::path& path);
std::vector<McqItem> parse_dataset(std::string_view jsonl, std::string_view source = "<memory>");

struct Split {
    std::vector<McqItem> train;
    std::vector<McqItem> test;
};

// round(train_fraction * n) clamped to [1, n - 1].
std::size_t train_size(std::size_t n, double train_fraction);

// Seeded Fisher-Yates shuffle followed by a prefix split. The shuffle uses
// its own bounded draw on mt19937_64, so results match across standard
// libraries.
Split split_dataset(std::span<const McqItem> items, double train_fraction, std::uint64_t seed);

}  // namespace spt
