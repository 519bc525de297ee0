#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <string>
#include <vector>

#include "daic/cycle.hpp"
#include "daic/results.hpp"

using namespace daic;

namespace {

// Small, fast experiment over the 64-dimensional fixture.
ExperimentPlan small_plan(std::uint64_t seed = 7) {
    ExperimentPlan plan;
    plan.cycles = 4;
    plan.repetitions = 2;
    plan.train_size = 250;
    plan.verification_size = 120;
    plan.master_seed = seed;
    plan.cycle.batch_size = 150;
    plan.cycle.sampling.budget = 60;
    plan.cycle.train.epochs = 6;
    plan.cycle.shift.start_cycle = 3;
    return plan;
}

LabeledSet small_corpus() {
    return synth_generate(1200, 10, 0.42, 99);
}

// Corpus with irreducible label noise: no model fits it perfectly, so
// failures (and pseudo-oracle firings) persist no matter how often the
// experiment retrains.
LabeledSet noisy_corpus() {
    LabeledSet set = synth_generate(1200, 10, 0.42, 99);
    const FormSpec forms = FormSpec::defaults();
    for (std::size_t i = 0; i < set.size(); i += 4) {
        Example& ex = set.examples[i];
        ex.true_label = (ex.true_label + 1) % 10;
        ex.form_id = forms.form_of(ex.true_label);
    }
    return set;
}

Example labeled_example(int label, int tag) {
    Example ex;
    ex.pixels.assign(64, 0.1);
    ex.true_label = label;
    ex.form_id = FormSpec::defaults().form_of(label);
    ex.origin_cycle = tag;
    return ex;
}

}  // namespace

TEST_CASE("trigger rule covers both clauses and all boundary combinations") {
    const TriggerPolicy policy;  // 0.05 / 0.80

    CHECK_FALSE(evaluate_trigger(policy, 0.861, 0.833));  // neither clause
    CHECK(evaluate_trigger(policy, 0.861, 0.678));        // both clauses
    CHECK_FALSE(evaluate_trigger(policy, 0.861, 0.868));  // predicted above verification
    CHECK(evaluate_trigger(policy, 0.82, 0.79));          // minimum-accuracy clause only
    CHECK(evaluate_trigger(policy, 0.95, 0.88));          // divergence clause only
    CHECK_FALSE(evaluate_trigger(policy, 0.84, 0.80));    // exactly at both boundaries
}

TEST_CASE("preprocess_data routes new labels per policy") {
    LabeledSet train;
    train.role = SetRole::train;
    LabeledSet verification;
    verification.role = SetRole::verification;
    for (int i = 0; i < 100; ++i) {
        train.examples.push_back(labeled_example(i % 10, 1000 + i));
    }
    for (int i = 0; i < 40; ++i) {
        verification.examples.push_back(labeled_example(i % 10, 2000 + i));
    }

    RetrainPolicy policy;  // replace_after_k, k=3, split 0.8

    SUBCASE("no new labels is the identity") {
        const auto out = preprocess_data(train, verification, {}, policy, 0, {}, 1);
        CHECK(out.applied == AppliedPolicy::none);
        CHECK(out.train.size() == 100);
        CHECK(out.verification.size() == 40);
    }

    SUBCASE("append splits 0.8 to train") {
        std::vector<Example> fresh;
        for (int i = 0; i < 500; ++i) {
            fresh.push_back(labeled_example(i % 10, 3000 + i));
        }
        std::deque<std::vector<Example>> history{fresh};
        const auto out = preprocess_data(train, verification, fresh, policy, 1, history, 1);
        CHECK(out.applied == AppliedPolicy::append);
        CHECK(out.train.size() == 500);          // 100 + 400
        CHECK(out.verification.size() == 140);   // 40 + 100
        // Appended examples keep their content.
        CHECK(out.train.examples.back().origin_cycle == 3399);
        CHECK(out.verification.examples.back().origin_cycle == 3499);
    }

    SUBCASE("replace_after_k rebuilds from the last k triggered cycles") {
        std::deque<std::vector<Example>> history;
        for (int h = 0; h < 3; ++h) {
            std::vector<Example> batch;
            for (int i = 0; i < 500; ++i) {
                batch.push_back(labeled_example(i % 10, 10000 + h * 1000 + i));
            }
            history.push_back(batch);
        }
        const auto out =
            preprocess_data(train, verification, history.back(), policy, 3, history, 1);
        CHECK(out.applied == AppliedPolicy::replace);
        CHECK(out.train.size() == 1200);
        CHECK(out.verification.size() == 300);
        // The old sets are gone: every example comes from the history pool.
        for (const Example& ex : out.train.examples) {
            CHECK(ex.origin_cycle >= 10000);
        }
    }

    SUBCASE("below k consecutive triggers replace behaves as append") {
        std::vector<Example> fresh;
        for (int i = 0; i < 50; ++i) {
            fresh.push_back(labeled_example(i % 10, 4000 + i));
        }
        std::deque<std::vector<Example>> history{fresh};
        const auto out = preprocess_data(train, verification, fresh, policy, 2, history, 1);
        CHECK(out.applied == AppliedPolicy::append);
        CHECK(out.train.size() == 140);
        CHECK(out.verification.size() == 50);
    }
}

TEST_CASE("run_experiment emits cycles x repetitions records deterministically") {
    const LabeledSet corpus = small_corpus();

    SUBCASE("single cycle, single repetition") {
        ExperimentPlan plan = small_plan();
        plan.cycles = 1;
        plan.repetitions = 1;
        const auto records = run_experiment(plan, corpus);
        REQUIRE(records.size() == 1);
        CHECK(records[0].cycle == 1);
        CHECK(records[0].repetition == 0);
    }

    SUBCASE("default-shaped grid") {
        const auto records = run_experiment(small_plan(), corpus);
        REQUIRE(records.size() == 8);  // 4 cycles x 2 repetitions
        for (const auto& r : records) {
            CHECK(r.verification_acc >= 0.0);
            CHECK(r.verification_acc <= 1.0);
            CHECK(r.estimated_acc.has_value() == r.triggered);
            if (r.triggered) {
                CHECK(r.n_labeled == 60);
            }
        }
    }

    SUBCASE("same master seed gives byte-identical record CSVs") {
        const auto a = run_experiment(small_plan(11), corpus);
        const auto b = run_experiment(small_plan(11), corpus);
        CHECK(records_to_csv(a) == records_to_csv(b));
        const auto c = run_experiment(small_plan(12), corpus);
        CHECK(records_to_csv(a) != records_to_csv(c));
    }

    SUBCASE("capacity errors surface before cycle 1") {
        ExperimentPlan plan = small_plan();
        plan.cycles = 100;
        CHECK_THROWS_AS(run_experiment(plan, corpus), CapacityError);
    }
}

TEST_CASE("forced triggers account labeling cost and engage the replace policy") {
    ExperimentPlan plan = small_plan();
    plan.cycles = 5;
    plan.repetitions = 1;
    plan.cycle.trigger.minimum_accuracy = 0.999;  // every cycle triggers
    plan.cycle.shift.swap_pairs.clear();

    const auto records = run_experiment(plan, noisy_corpus());
    REQUIRE(records.size() == 5);
    int cumulative = 0;
    for (const auto& r : records) {
        CHECK(r.triggered);
        cumulative += r.n_labeled;
    }
    CHECK(cumulative == 5 * 60);  // budget x triggered cycles

    // First cycle trains fresh, next two append, fourth replaces (k=3 reached).
    CHECK(records[0].policy_applied == AppliedPolicy::none);
    CHECK(records[1].policy_applied == AppliedPolicy::append);
    CHECK(records[2].policy_applied == AppliedPolicy::append);
    CHECK(records[3].policy_applied == AppliedPolicy::replace);
    CHECK(records[4].policy_applied == AppliedPolicy::replace);
}

TEST_CASE("submodule errors abort the repetition naming the phase") {
    ExperimentPlan plan = small_plan();
    plan.cycle.train.learning_rate = 1e9;  // diverges in cycle 1
    try {
        run_experiment(plan, small_corpus());
        FAIL("expected divergence");
    } catch (const DaicError& e) {
        CHECK(e.category() == ErrorCategory::divergence);
        CHECK(std::string(e.what()).find("phase 2 retraining") != std::string::npos);
    }
}

TEST_CASE("reported ground truth never steers control flow") {
    const LabeledSet corpus = small_corpus();
    ExperimentPlan plain = small_plan(21);
    ExperimentPlan remapped = small_plan(21);
    remapped.cycle.report_truth_remap = {{1, 0}, {0, 1}};

    const auto a = run_experiment(plain, corpus);
    const auto b = run_experiment(remapped, corpus);
    REQUIRE(a.size() == b.size());
    bool actual_changed = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].triggered == b[i].triggered);
        CHECK(a[i].n_labeled == b[i].n_labeled);
        CHECK(a[i].policy_applied == b[i].policy_applied);
        CHECK(a[i].predicted_acc == b[i].predicted_acc);
        CHECK(a[i].verification_acc == b[i].verification_acc);
        if (a[i].estimated_acc && b[i].estimated_acc) {
            CHECK(*a[i].estimated_acc == *b[i].estimated_acc);
        }
        actual_changed = actual_changed || a[i].actual_acc != b[i].actual_acc;
    }
    CHECK(actual_changed);
}
