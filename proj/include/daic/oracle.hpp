#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daic/dataset.hpp"
#include "daic/model.hpp"

namespace daic {

// ---------------------------------------------------------------------------
// Domain invariants: the prediction must belong to the set of digits the
// source form can contain.
// ---------------------------------------------------------------------------

struct DomainInvariant {
    FormSpec form_spec = FormSpec::defaults();
};

// True iff the predicted label violates the form constraint.
bool check_domain(const DomainInvariant& inv, FormId form, int predicted_label);

// ---------------------------------------------------------------------------
// Data invariants: decision rules over binarized pixels whose satisfaction
// historically coincides with model failure.
// ---------------------------------------------------------------------------

struct RuleCondition {
    int feature = 0;  // index into the binarized grid, row-major
    bool value = false;
};

struct DataRule {
    std::vector<RuleCondition> antecedent;
    double confidence = 0.0;
    int support = 0;

    bool matches(const std::vector<bool>& features) const;
};

struct RuleMinerConfig {
    int pool_factor = 2;        // average-pool window (28x28 -> 14x14)
    double binarize_at = 0.5;   // threshold on pooled intensity
    int max_depth = 12;
    int min_leaf = 10;
    double min_confidence = 0.99;
    int min_support = 10;
};

// Average-pool by pool_factor then threshold; the feature vector data rules
// are expressed over. Pixel count must be a square with even side.
std::vector<bool> binarize_pixels(const std::vector<double>& pixels, int pool_factor = 2,
                                  double threshold = 0.5);

// Mine fail-predicting decision rules: grow a gain-ratio tree on binarized
// pixels with the target "does the model mispredict this example", then keep
// every fail-majority leaf path with confidence >= 0.99 and support >= 10.
std::vector<DataRule> extract_data_rules(const LabeledSet& train, const NetworkParams& params,
                                         const RuleMinerConfig& cfg = {},
                                         ExecPolicy policy = ExecPolicy::parallel);

// `fail :- px(r,c)=v & ... [conf=..., supp=...]`, one rule per line.
std::string rule_to_text(const DataRule& rule, int grid_side);
std::string export_rules(std::span<const DataRule> rules, int grid_side);

// ---------------------------------------------------------------------------
// Model invariants: a random forest over the last-layer outputs that predicts
// pass/fail of the model on verification data.
// ---------------------------------------------------------------------------

struct FailureForestConfig {
    int n_trees = 100;
    int max_depth = 10;
    // Failing examples are replicated this many times in the bootstrap frame,
    // compensating the pass/fail imbalance of an accurate model so that the
    // majority vote keeps usable failure recall.
    int fail_oversample = 3;
};

class FailureForest {
public:
    FailureForest() = default;

    // Majority vote over the trees; a forest trained on a single-class target
    // degenerates to always-pass.
    bool predicts_fail(std::span<const double> features) const;
    int fail_votes(std::span<const double> features) const;

    int n_trees() const { return static_cast<int>(trees_.size()); }
    bool degenerate() const { return degenerate_pass_; }

private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        bool leaf_fail = false;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    std::vector<Tree> trees_;
    bool degenerate_pass_ = false;

    friend FailureForest train_failure_forest(const LabeledSet&, const NetworkParams&,
                                              std::uint64_t, const FailureForestConfig&,
                                              ExecPolicy);
};

// Bootstrap-resampled trees on (last-layer outputs -> fail/pass), ceil(sqrt(d))
// features per split. Deterministic given seed, for any thread count.
FailureForest train_failure_forest(const LabeledSet& verification, const NetworkParams& params,
                                   std::uint64_t seed, const FailureForestConfig& cfg = {},
                                   ExecPolicy policy = ExecPolicy::parallel);

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class OracleMode : std::uint8_t {
    dnn_os,    // domain + data + model invariants
    baseline,  // data + model invariants only
};

struct Fired {
    bool domain = false;
    bool data = false;
    bool model = false;

    bool any() const { return domain || data || model; }
};

struct Verdict {
    bool fail = false;  // outcome: Fail iff any invariant fired
    Fired fired;
};

// All invariant artifacts for one model snapshot.
struct Oracle {
    OracleMode mode = OracleMode::dnn_os;
    DomainInvariant domain;
    std::vector<DataRule> rules;
    FailureForest forest;
    RuleMinerConfig miner_cfg;
    std::uint64_t model_identity = 0;
};

Oracle build_oracle(const LabeledSet& train, const LabeledSet& verification,
                    const NetworkParams& params, OracleMode mode, std::uint64_t seed,
                    const RuleMinerConfig& miner_cfg = {},
                    const FailureForestConfig& forest_cfg = {},
                    ExecPolicy policy = ExecPolicy::parallel);

// Judge one prediction. Throws ConsistencyError when the oracle was built for
// a different parameter snapshot than the one that produced `pred`.
Verdict judge(const Oracle& oracle, const Example& x, const Prediction& pred,
              std::uint64_t params_identity);

std::vector<Verdict> judge_batch(const Oracle& oracle, std::span<const Example> batch,
                                 std::span<const Prediction> preds,
                                 std::uint64_t params_identity,
                                 ExecPolicy policy = ExecPolicy::parallel);

// Fraction of Pass verdicts: the online ("predicted") accuracy estimate.
double predicted_accuracy(std::span<const Verdict> verdicts);

}  // namespace daic
