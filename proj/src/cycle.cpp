#include "daic/cycle.hpp"

#include <algorithm>
#include <random>

#include "daic/common.hpp"

namespace daic {

void TriggerPolicy::validate() const {
    if (!(divergence_threshold > 0.0) || divergence_threshold >= 1.0) {
        throw ConfigError("trigger.divergence_threshold must be in (0, 1)");
    }
    if (!(minimum_accuracy > 0.0) || minimum_accuracy >= 1.0) {
        throw ConfigError("trigger.minimum_accuracy must be in (0, 1)");
    }
}

bool evaluate_trigger(const TriggerPolicy& policy, double verification_acc,
                      double predicted_acc) {
    return predicted_acc < verification_acc - policy.divergence_threshold ||
           predicted_acc < policy.minimum_accuracy;
}

void RetrainPolicy::validate() const {
    if (k < 1) {
        throw ConfigError("retrain.k must be >= 1");
    }
    if (!(new_label_split > 0.0) || new_label_split > 1.0) {
        throw ConfigError("retrain.new_label_split must be in (0, 1]");
    }
}

std::string to_string(AppliedPolicy policy) {
    switch (policy) {
        case AppliedPolicy::none:
            return "none";
        case AppliedPolicy::append:
            return "append";
        case AppliedPolicy::replace:
            return "replace";
    }
    return "none";
}

PreprocessResult preprocess_data(const LabeledSet& train, const LabeledSet& verification,
                                 const std::vector<Example>& new_labels,
                                 const RetrainPolicy& policy, int consecutive_triggers,
                                 const std::deque<std::vector<Example>>& trigger_history,
                                 std::uint64_t seed) {
    policy.validate();
    PreprocessResult out;
    out.train = train;
    out.verification = verification;
    if (new_labels.empty()) {
        return out;
    }
    for (const Example& ex : new_labels) {
        if (!ex.labeled()) {
            throw ParameterError("preprocess_data: unlabeled example among new labels");
        }
    }

    if (policy.mode == RetrainMode::replace_after_k && consecutive_triggers >= policy.k) {
        // Rebuild both sets from the operational labels of the last k
        // triggered cycles only.
        std::vector<Example> pool;
        const std::size_t start = trigger_history.size() - std::size_t(policy.k);
        for (std::size_t h = start; h < trigger_history.size(); ++h) {
            pool.insert(pool.end(), trigger_history[h].begin(), trigger_history[h].end());
        }
        std::mt19937_64 rng(seed);
        std::shuffle(pool.begin(), pool.end(), rng);
        const auto n_train = static_cast<std::size_t>(
            std::llround(double(pool.size()) * policy.new_label_split));

        out.train.examples.assign(pool.begin(), pool.begin() + n_train);
        out.train.role = SetRole::train;
        out.verification.examples.assign(pool.begin() + n_train, pool.end());
        out.verification.role = SetRole::verification;
        out.applied = AppliedPolicy::replace;
        return out;
    }

    const auto n_to_train = static_cast<std::size_t>(
        std::llround(double(new_labels.size()) * policy.new_label_split));
    out.train.examples.insert(out.train.examples.end(), new_labels.begin(),
                              new_labels.begin() + n_to_train);
    out.verification.examples.insert(out.verification.examples.end(),
                                     new_labels.begin() + n_to_train, new_labels.end());
    out.applied = AppliedPolicy::append;
    return out;
}

namespace {

// Seed stream tags, one per per-cycle consumer.
enum : std::uint64_t {
    kSeedTrain = 1,
    kSeedOracle = 2,
    kSeedBatch = 3,
    kSeedSample = 4,
    kSeedPreprocess = 5,
};

// Submodule errors abort the repetition; annotate them with the phase name.
template <typename Fn>
auto in_phase(const char* phase, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const DaicError& e) {
        throw DaicError(e.category(), std::string("phase ") + phase + ": " + e.what());
    }
}

double reported_actual_accuracy(std::span<const Example> batch,
                                std::span<const Prediction> preds,
                                const std::vector<std::pair<int, int>>& remap) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        int truth = batch[i].true_label;
        for (const auto& [from, to] : remap) {
            if (truth == from) {
                truth = to;
                break;
            }
        }
        correct += preds[i].label == truth ? 1 : 0;
    }
    return double(correct) / double(batch.size());
}

}  // namespace

CycleRecord run_cycle(CycleState& state, int cycle_index, const CycleConfig& config) {
    CycleRecord record;
    record.cycle = cycle_index;

    const std::uint64_t cycle_seed =
        derive_seed(state.rep_seed, static_cast<std::uint64_t>(cycle_index));

    // Phases 1-3: preprocess, (re)train, verify. Skipped entirely when the
    // model is already deployed and no new labels arrived.
    const bool first_cycle = !state.model_ready;
    if (first_cycle || !state.pending_new_labels.empty()) {
        TrainConfig train_cfg = config.train;
        train_cfg.seed = derive_seed(cycle_seed, kSeedTrain);

        if (first_cycle) {
            state.model = in_phase("2 retraining",
                                   [&] { return train(state.train, train_cfg, nullptr,
                                                      config.exec); });
            record.policy_applied = AppliedPolicy::none;
        } else {
            PreprocessResult pre = in_phase("1 data preprocessing", [&] {
                return preprocess_data(state.train, state.verification,
                                       state.pending_new_labels, config.retrain,
                                       state.consecutive_triggers, state.trigger_history,
                                       derive_seed(cycle_seed, kSeedPreprocess));
            });
            state.train = std::move(pre.train);
            state.verification = std::move(pre.verification);
            record.policy_applied = pre.applied;
            state.pending_new_labels.clear();

            // Replace re-models from scratch; append continues training the
            // deployed weights.
            const NetworkParams* warm_start =
                pre.applied == AppliedPolicy::replace ? nullptr : &state.model;
            state.model = in_phase("2 retraining",
                                   [&] { return train(state.train, train_cfg, warm_start,
                                                      config.exec); });
        }
        state.model_ready = true;
        state.oracle = in_phase("2 retraining", [&] {
            return build_oracle(state.train, state.verification, state.model,
                                config.oracle_mode, derive_seed(cycle_seed, kSeedOracle),
                                config.miner, config.forest, config.exec);
        });
        state.verification_acc = in_phase("3 model verification", [&] {
            return accuracy(state.model, state.verification, config.exec);
        });
    }
    record.verification_acc = state.verification_acc;

    // Phases 4-5: deploy and monitor one operational batch.
    const std::vector<Example> batch = in_phase("5 monitoring", [&] {
        return draw_operational_batch(state.operational_pool, cycle_index, config.shift,
                                      derive_seed(cycle_seed, kSeedBatch), config.batch_size);
    });
    const std::vector<Prediction> preds = in_phase("5 monitoring", [&] {
        return predict_batch(state.model, batch, config.exec);
    });

    // Phase 6: pseudo-oracle assessment.
    const std::vector<Verdict> verdicts = in_phase("6 pseudo-oracle assessment", [&] {
        return judge_batch(state.oracle, batch, preds, state.model.identity, config.exec);
    });
    record.predicted_acc = predicted_accuracy(verdicts);

    // Ground truth is consulted for reporting only; no control flow below
    // reads record.actual_acc.
    record.actual_acc = reported_actual_accuracy(batch, preds, config.report_truth_remap);

    // Phase 7: evaluation.
    record.triggered =
        evaluate_trigger(config.trigger, record.verification_acc, record.predicted_acc);

    // Phase 8: sampling-based assessment and label collection.
    if (record.triggered) {
        SamplingPlan plan = config.sampling;
        plan.seed = derive_seed(cycle_seed, kSeedSample);
        const AccuracyEstimate estimate = in_phase("8 sampling assessment", [&] {
            std::vector<SampledUnit> units = draw_sample(batch, preds, plan);
            std::vector<int> truth(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) {
                truth[i] = batch[i].true_label;
            }
            label_units(units, truth);
            state.last_sample = std::move(units);
            return estimate_accuracy(state.last_sample);
        });
        record.estimated_acc = estimate.point;
        record.n_labeled = estimate.n_labeled;

        std::vector<Example> labeled;
        labeled.reserve(state.last_sample.size());
        for (const SampledUnit& unit : state.last_sample) {
            labeled.push_back(batch[unit.index]);
        }
        state.pending_new_labels = labeled;
        state.trigger_history.push_back(std::move(labeled));
        while (static_cast<int>(state.trigger_history.size()) > config.retrain.k) {
            state.trigger_history.pop_front();
        }
        state.consecutive_triggers += 1;
    } else {
        state.consecutive_triggers = 0;
        state.trigger_history.clear();
        state.pending_new_labels.clear();
    }
    return record;
}

std::vector<CycleRecord> run_experiment(const ExperimentPlan& plan, const LabeledSet& corpus) {
    if (plan.cycles < 1 || plan.repetitions < 1) {
        throw ConfigError("experiment needs cycles >= 1 and repetitions >= 1");
    }
    plan.cycle.trigger.validate();
    plan.cycle.retrain.validate();
    plan.cycle.sampling.validate();
    plan.cycle.shift.validate();
    plan.cycle.train.validate();

    const std::size_t required = plan.train_size + plan.verification_size +
                                 std::size_t(plan.cycles) * plan.cycle.batch_size;
    if (corpus.size() < required) {
        throw CapacityError("corpus of " + std::to_string(corpus.size()) +
                            " examples cannot cover " + std::to_string(plan.cycles) +
                            " cycles (need " + std::to_string(required) + ")");
    }

    std::vector<CycleRecord> records;
    records.reserve(std::size_t(plan.cycles) * plan.repetitions);
    for (int rep = 0; rep < plan.repetitions; ++rep) {
        const std::uint64_t rep_seed =
            derive_seed(plan.master_seed, static_cast<std::uint64_t>(rep));

        CycleState state;
        Splits splits = make_splits(corpus, derive_seed(rep_seed, 0x5b17), plan.train_size,
                                    plan.verification_size);
        state.train = std::move(splits.train);
        state.verification = std::move(splits.verification);
        state.operational_pool = std::move(splits.operational_pool);
        state.rep_seed = rep_seed;

        for (int cycle = 1; cycle <= plan.cycles; ++cycle) {
            CycleRecord record = run_cycle(state, cycle, plan.cycle);
            record.repetition = rep;
            records.push_back(record);
        }
    }
    return records;
}

}  // namespace daic
