#pragma once

#include <filesystem>
#include <vector>

#include "sim.hpp"
#include "spt/mock_backend.hpp"
#include "spt/run.hpp"

namespace spt::testing {

// 20 training items (12 answered correctly with an empty prompt) and 5 test
// items. Hints make the three epochs of the committed trace come out as
// 0.6 -> 0.8 -> 1.0.
std::vector<SimItem> e2e_train();
std::vector<SimItem> e2e_test();
std::vector<std::vector<std::string>> e2e_plan();

// 10 items for evaluation tests; 7 answered correctly under the empty
// prompt, 2 wrongly and 1 without a usable number.
std::vector<McqItem> eval10_items();
MockScript eval10_script();

std::vector<McqItem> items_of(const std::vector<SimItem>& sims);
void write_jsonl(const std::filesystem::path& path, std::span<const McqItem> items);

// SPT-p run over <dir>/train.jsonl and <dir>/test.jsonl replayed from
// <dir>/mock_script.json.
TrainerConfig e2e_config(const std::filesystem::path& fixture_dir);

}  // namespace spt::testing
