#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "daic/dataset.hpp"
#include "daic/estimator.hpp"
#include "daic/model.hpp"
#include "daic/oracle.hpp"

namespace daic {

struct TriggerPolicy {
    double divergence_threshold = 0.05;
    double minimum_accuracy = 0.80;

    void validate() const;
};

// True iff the offline sampling-based assessment must run:
// predicted < verification - threshold, or predicted < minimum accuracy.
bool evaluate_trigger(const TriggerPolicy& policy, double verification_acc,
                      double predicted_acc);

enum class RetrainMode : std::uint8_t { append, replace_after_k };

struct RetrainPolicy {
    RetrainMode mode = RetrainMode::replace_after_k;
    int k = 3;                     // consecutive triggers before replacing
    double new_label_split = 0.8;  // fraction of new labels routed to training

    void validate() const;
};

enum class AppliedPolicy : std::uint8_t { none, append, replace };

std::string to_string(AppliedPolicy policy);

struct CycleRecord {
    int cycle = 0;       // 1-based
    int repetition = 0;  // 0-based
    double verification_acc = 0.0;
    double actual_acc = 0.0;  // ground truth, reporting only
    double predicted_acc = 0.0;
    std::optional<double> estimated_acc;  // present iff triggered
    bool triggered = false;
    int n_labeled = 0;
    AppliedPolicy policy_applied = AppliedPolicy::none;
};

struct PreprocessResult {
    LabeledSet train;
    LabeledSet verification;
    AppliedPolicy applied = AppliedPolicy::none;
};

// Phase 1. Append mode splits the new labels new_label_split : rest into
// train : verification. Replace mode (once consecutive_triggers >= k) rebuilds
// both sets from the operational labels of the last k triggered cycles,
// with a held-out (1 - new_label_split) share as verification.
PreprocessResult preprocess_data(const LabeledSet& train, const LabeledSet& verification,
                                 const std::vector<Example>& new_labels,
                                 const RetrainPolicy& policy, int consecutive_triggers,
                                 const std::deque<std::vector<Example>>& trigger_history,
                                 std::uint64_t seed);

// Settings run_cycle needs; the CLI layer assembles this from ExperimentConfig.
struct CycleConfig {
    TriggerPolicy trigger;
    RetrainPolicy retrain;
    SamplingPlan sampling;       // per-cycle seed is derived, plan.seed ignored
    ShiftSpec shift;
    TrainConfig train;
    OracleMode oracle_mode = OracleMode::dnn_os;
    std::size_t batch_size = 1000;
    RuleMinerConfig miner;
    FailureForestConfig forest;
    ExecPolicy exec = ExecPolicy::parallel;
    // Test hook: remap applied to true labels in the reported actual accuracy
    // only; labeling and retraining always see the real ground truth.
    std::vector<std::pair<int, int>> report_truth_remap;
};

// State carried across the cycles of one repetition.
struct CycleState {
    LabeledSet train;
    LabeledSet verification;
    LabeledSet operational_pool;
    NetworkParams model;
    bool model_ready = false;
    Oracle oracle;
    double verification_acc = 0.0;
    std::vector<Example> pending_new_labels;  // labeled units awaiting phase 1
    std::deque<std::vector<Example>> trigger_history;
    std::vector<SampledUnit> last_sample;  // most recent offline sample log
    int consecutive_triggers = 0;
    std::uint64_t rep_seed = 0;
};

// Phases 1-8 for one cycle; mutates state and returns the record row.
CycleRecord run_cycle(CycleState& state, int cycle_index, const CycleConfig& config);

struct ExperimentPlan {
    CycleConfig cycle;
    int cycles = 8;
    int repetitions = 5;
    std::size_t train_size = 1000;
    std::size_t verification_size = 500;
    std::uint64_t master_seed = 7;
};

// Runs repetitions x cycles over a labeled corpus; capacity is checked before
// cycle 1. Repetition seeds derive from the master seed.
std::vector<CycleRecord> run_experiment(const ExperimentPlan& plan, const LabeledSet& corpus);

}  // namespace daic
