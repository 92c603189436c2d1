#include "e2e_fixture.hpp"

#include <fstream>

#include <json.hpp>

#include "spt/corrector.hpp"
#include "spt/mock_backend.hpp"

namespace spt::testing {

namespace {

// Three numeric choices with the gold answer rotated through the positions.
McqItem sum_item(const std::string& id, const std::string& question, int answer, int position) {
    std::vector<std::string> choices = {std::to_string(answer - 1), std::to_string(answer + 1),
                                        std::to_string(answer + 2)};
    choices.insert(choices.begin() + position, std::to_string(answer));
    choices.pop_back();
    return make_item(id, question, std::move(choices), position);
}

std::string pad2(int i) {
    return (i < 10 ? "0" : "") + std::to_string(i);
}

}  // namespace

std::vector<SimItem> e2e_train() {
    std::vector<SimItem> out;
    for (int i = 1; i <= 20; ++i) {
        const int a = 10 + i;
        const int b = 3 * i;
        const std::string q = "A shelf holds " + std::to_string(a) + " books and " + std::to_string(b) +
                              " more are added. How many books are on the shelf now?";
        SimItem s{sum_item("trn-" + pad2(i), q, a + b, i % 3), i <= 12, {}};
        switch (i) {
        case 13: s.hints = {"Verify arithmetic.", "Check units."}; break;
        case 14:
        case 15: s.hints = {"Verify arithmetic."}; break;
        case 16: s.hints = {"Read every option."}; break;
        case 17: s.hints = {"Check units."}; break;
        case 18:
        case 19: s.hints = {"Recall definitions."}; break;
        case 20: s.hints = {"Consider negations."}; break;
        default: break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SimItem> e2e_test() {
    std::vector<SimItem> out;
    for (int i = 1; i <= 5; ++i) {
        const int a = 100 + 7 * i;
        const std::string q = "A tank holds " + std::to_string(a) + " litres and " + std::to_string(i) +
                              " litres leak out. How many litres remain?";
        SimItem s{sum_item("tst-" + pad2(i), q, a - i, (i + 1) % 3), i <= 2, {}};
        if (i == 3) s.hints = {"Verify arithmetic."};
        if (i == 4) s.hints = {"Consider negations."};
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::vector<std::string>> e2e_plan() {
    const std::string p1 = "Read every option. Verify arithmetic.";
    return {
        {"Check units.", p1, "Verify arithmetic. Check units."},
        {p1 + " Check units.", p1 + " Check units. Recall definitions. Consider negations.",
         p1 + " Recall definitions."},
    };
}

std::vector<McqItem> eval10_items() {
    std::vector<McqItem> out;
    for (int i = 1; i <= 10; ++i) {
        const int a = 40 + 5 * i;
        const std::string q = "A train travels " + std::to_string(a) + " km in the first hour and " +
                              std::to_string(i) + " km more in the second. What is the total distance in km?";
        out.push_back(sum_item("ev-" + pad2(i), q, a + i, i % 3));
    }
    return out;
}

MockScript eval10_script() {
    MockScript script;
    const auto items = eval10_items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        ScriptedReply reply = item.answer_index;
        if (i == 3 || i == 7) {
            reply = (item.answer_index + 1) % 3;
        } else if (i == 5) {
            reply = std::string("I cannot tell which one.");
        }
        script.set_answer("", item.id, reply);
    }
    return script;
}

std::vector<McqItem> items_of(const std::vector<SimItem>& sims) {
    std::vector<McqItem> out;
    for (const auto& s : sims) {
        out.push_back(s.item);
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, std::span<const McqItem> items) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    for (const auto& item : items) {
        nlohmann::ordered_json j;
        j["id"] = item.id;
        j["question"] = item.question;
        j["choices"] = item.choices;
        j["answer_index"] = item.answer_index;
        out << j.dump() << '\n';
    }
}

TrainerConfig e2e_config(const std::filesystem::path& fixture_dir) {
    TrainerConfig c;
    c.variant = Variant::spt_p;
    c.n_candidates = 3;
    c.max_epochs = 5;
    c.dataset_path = (fixture_dir / "train.jsonl").string();
    c.test_dataset_path = (fixture_dir / "test.jsonl").string();
    c.generator.kind = BackendKind::scripted_mock;
    c.generator.mock_script_path = (fixture_dir / "mock_script.json").string();
    c.corrector = c.generator;
    c.corrector.temperature = 1.0;
    return c;
}

}  // namespace spt::testing
