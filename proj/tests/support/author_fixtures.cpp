// Regenerates the committed e2e and eval fixtures:
//   author_fixtures <tests/fixtures>
// The e2e mock script is recorded from the rule-based simulator. The expected
// trace next to it is maintained by hand and is not touched here.
#include <iostream>

#include "e2e_fixture.hpp"
#include "spt/mock_backend.hpp"
#include "spt/serialization.hpp"
#include "spt/trainer.hpp"

using namespace spt;
using namespace spt::testing;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: author_fixtures <fixtures dir>\n";
        return 2;
    }
    const std::filesystem::path root = argv[1];
    const auto e2e = root / "e2e";
    const auto train_items = items_of(e2e_train());
    const auto test_items = items_of(e2e_test());
    write_jsonl(e2e / "train.jsonl", train_items);
    write_jsonl(e2e / "test.jsonl", test_items);

    std::vector<SimItem> all = e2e_train();
    for (auto& s : e2e_test()) {
        all.push_back(s);
    }
    SimGenerator generator(all);
    PlanCorrector corrector(e2e_plan());
    RecordingBackend gen_rec(generator);
    RecordingBackend corr_rec(corrector);

    TrainerConfig config = e2e_config(e2e);
    const TrainRun run = train(config, {gen_rec, corr_rec});

    MockScript script = gen_rec.script();
    for (const auto& [fp, responses] : corr_rec.script().completions) {
        script.completions[fp] = responses;
    }
    script.save(e2e / "mock_script.json");

    write_jsonl(root / "eval10" / "items.jsonl", eval10_items());
    eval10_script().save(root / "eval10" / "mock_script.json");

    for (const auto& e : run.epochs) {
        std::cout << "epoch " << e.epoch << " train " << e.train_accuracy.correct << "/" << e.train_accuracy.total
                  << " candidates";
        for (const auto& c : e.candidates) {
            std::cout << " " << c.mistake_accuracy.correct << "/" << c.mistake_accuracy.total;
        }
        std::cout << " selected " << (e.selected_index ? std::to_string(*e.selected_index) : "-") << " test "
                  << (e.test_accuracy ? std::to_string(e.test_accuracy->correct) : "-") << "\n";
    }
    std::cout << "status " << to_string(run.status) << "\n";
    return 0;
}
