#include <gtest/gtest.h>

#include <set>

#include "spt/datasets.hpp"
#include "spt/error.hpp"

using namespace spt;

namespace {

std::string line(const std::string& id, int answer = 0, const std::string& choices = R"(["a","b","c"])") {
    return R"({"id":")" + id + R"(","question":"Q )" + id + R"(?","choices":)" + choices +
           R"(,"answer_index":)" + std::to_string(answer) + "}\n";
}

std::vector<McqItem> synthetic(std::size_t n) {
    std::vector<McqItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        items.push_back({"item-" + std::to_string(i), "Question " + std::to_string(i), {"a", "b", "c"}, 0});
    }
    return items;
}

std::vector<std::string> ids(const std::vector<McqItem>& items) {
    std::vector<std::string> out;
    for (const auto& i : items) {
        out.push_back(i.id);
    }
    return out;
}

std::string expect_validation_error(const std::string& jsonl) {
    try {
        parse_dataset(jsonl, "d.jsonl");
    } catch (const ValidationError& e) {
        return e.what();
    }
    ADD_FAILURE() << "no ValidationError";
    return "";
}

}  // namespace

TEST(LoadDataset, ValidFile) {
    const auto items = parse_dataset(line("a") + "\n" + line("b", 2) + line("c", 1, R"(["w","x","y","z"])"));
    ASSERT_EQ(items.size(), 3u);
    EXPECT_EQ(items[1].answer_index, 2);
    EXPECT_EQ(items[2].choices.size(), 4u);
}

TEST(LoadDataset, Errors) {
    EXPECT_NE(expect_validation_error(line("q7", 5, R"(["w","x","y","z"])")).find("q7"), std::string::npos);
    EXPECT_NE(expect_validation_error(line("dup") + line("dup")).find("dup"), std::string::npos);
    EXPECT_NE(expect_validation_error(line("ok") + "{not json\n").find("d.jsonl:2"), std::string::npos);
    EXPECT_NE(expect_validation_error(R"({"id":"m","question":"q","choices":["a","b","c"]})" "\n").find("d.jsonl:1"),
              std::string::npos);
    EXPECT_THROW(load_dataset("/nonexistent/file.jsonl"), ConfigError);
}

TEST(TrainSize, PaperSplit) {
    EXPECT_EQ(train_size(817, 653.0 / 817.0), 653u);
}

TEST(TrainSize, MatchesRoundingTable) {
    // Exact rational reference: round half up of p*n/q, then clamp to keep
    // both sides non-empty.
    const std::vector<std::pair<std::int64_t, std::int64_t>> fractions = {
        {1, 1000}, {1, 20}, {1, 10}, {1, 4}, {1, 3}, {1, 2}, {2, 3}, {4, 5}, {19, 20}, {999, 1000}, {653, 817},
    };
    for (std::int64_t n = 2; n <= 20; ++n) {
        for (const auto& [p, q] : fractions) {
            std::int64_t expected = (2 * p * n + q) / (2 * q);
            expected = std::clamp<std::int64_t>(expected, 1, n - 1);
            EXPECT_EQ(train_size(static_cast<std::size_t>(n), static_cast<double>(p) / static_cast<double>(q)),
                      static_cast<std::size_t>(expected))
                << "n=" << n << " f=" << p << "/" << q;
        }
    }
    EXPECT_EQ(train_size(10, 0.999), 9u);
}

TEST(TrainSize, Preconditions) {
    EXPECT_THROW(train_size(1, 0.5), PreconditionError);
    EXPECT_THROW(train_size(10, 0.0), PreconditionError);
    EXPECT_THROW(train_size(10, 1.0), PreconditionError);
}

TEST(Split, SizesAndDeterminism) {
    const auto items = synthetic(817);
    const auto a = split_dataset(items, 653.0 / 817.0, 3);
    EXPECT_EQ(a.train.size(), 653u);
    EXPECT_EQ(a.test.size(), 164u);
    const auto b = split_dataset(items, 653.0 / 817.0, 3);
    EXPECT_EQ(ids(a.train), ids(b.train));
    EXPECT_EQ(ids(a.test), ids(b.test));
    const auto c = split_dataset(items, 653.0 / 817.0, 4);
    EXPECT_NE(ids(a.train), ids(c.train));
}

TEST(Split, IsAPartition) {
    for (std::size_t n : {2u, 3u, 10u, 57u}) {
        const auto items = synthetic(n);
        for (double f : {0.01, 0.3, 0.5, 0.8, 0.99}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const auto s = split_dataset(items, f, seed);
                std::multiset<std::string> all;
                for (const auto& i : s.train) all.insert(i.id);
                for (const auto& i : s.test) all.insert(i.id);
                EXPECT_EQ(all.size(), n);
                EXPECT_EQ(std::set<std::string>(all.begin(), all.end()).size(), n);
                EXPECT_GE(s.train.size(), 1u);
                EXPECT_GE(s.test.size(), 1u);
            }
        }
    }
}
