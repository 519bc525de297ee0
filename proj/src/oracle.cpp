#include "daic/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "daic/common.hpp"

namespace daic {

bool check_domain(const DomainInvariant& inv, FormId form, int predicted_label) {
    return !inv.form_spec.allows(form, predicted_label);
}

bool DataRule::matches(const std::vector<bool>& features) const {
    for (const RuleCondition& cond : antecedent) {
        if (cond.feature < 0 || cond.feature >= static_cast<int>(features.size())) {
            return false;
        }
        if (features[cond.feature] != cond.value) {
            return false;
        }
    }
    return true;
}

std::vector<bool> binarize_pixels(const std::vector<double>& pixels, int pool_factor,
                                  double threshold) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(pixels.size()))));
    if (std::size_t(side) * side != pixels.size()) {
        throw ParameterError("binarize_pixels: pixel count is not a square");
    }
    if (pool_factor < 1 || side % pool_factor != 0) {
        throw ParameterError("binarize_pixels: side not divisible by pool factor");
    }
    const int pooled = side / pool_factor;
    std::vector<bool> out(std::size_t(pooled) * pooled);
    const double denom = double(pool_factor) * pool_factor;
    for (int r = 0; r < pooled; ++r) {
        for (int c = 0; c < pooled; ++c) {
            double acc = 0.0;
            for (int dr = 0; dr < pool_factor; ++dr) {
                for (int dc = 0; dc < pool_factor; ++dc) {
                    acc += pixels[std::size_t(r * pool_factor + dr) * side + c * pool_factor + dc];
                }
            }
            out[std::size_t(r) * pooled + c] = (acc / denom) > threshold;
        }
    }
    return out;
}

namespace {

double entropy2(int a, int b) {
    const int n = a + b;
    if (n == 0 || a == 0 || b == 0) {
        return 0.0;
    }
    const double pa = double(a) / n;
    const double pb = double(b) / n;
    return -pa * std::log2(pa) - pb * std::log2(pb);
}

struct RuleTreeBuilder {
    const std::vector<std::vector<bool>>& features;
    const std::vector<bool>& fail;
    const RuleMinerConfig& cfg;
    int n_features;
    std::vector<DataRule> accepted;

    void grow(std::vector<int>& idx, int depth, std::vector<RuleCondition>& path) {
        int fail_count = 0;
        for (int i : idx) {
            fail_count += fail[i] ? 1 : 0;
        }
        const int size = static_cast<int>(idx.size());
        const int pass_count = size - fail_count;

        const bool pure = fail_count == 0 || pass_count == 0;
        bool split_done = false;
        if (!pure && depth < cfg.max_depth && size >= 2 * cfg.min_leaf) {
            split_done = try_split(idx, depth, path, fail_count);
        }
        if (split_done) {
            return;
        }
        // Leaf: emit a rule when failures dominate and the filter passes.
        if (fail_count > pass_count) {
            const double confidence = double(fail_count) / size;
            if (confidence >= cfg.min_confidence && size >= cfg.min_support) {
                accepted.push_back(DataRule{path, confidence, size});
            }
        }
    }

    bool try_split(std::vector<int>& idx, int depth, std::vector<RuleCondition>& path,
                   int fail_count) {
        const int size = static_cast<int>(idx.size());
        const double parent_entropy = entropy2(fail_count, size - fail_count);

        int best_feature = -1;
        double best_ratio = 0.0;
        for (int f = 0; f < n_features; ++f) {
            int n1 = 0;
            int fail1 = 0;
            for (int i : idx) {
                if (features[i][f]) {
                    ++n1;
                    fail1 += fail[i] ? 1 : 0;
                }
            }
            const int n0 = size - n1;
            if (n0 < cfg.min_leaf || n1 < cfg.min_leaf) {
                continue;
            }
            const int fail0 = fail_count - fail1;
            const double child_entropy = (double(n0) / size) * entropy2(fail0, n0 - fail0) +
                                         (double(n1) / size) * entropy2(fail1, n1 - fail1);
            const double gain = parent_entropy - child_entropy;
            if (gain <= 1e-12) {
                continue;
            }
            const double split_info = entropy2(n0, n1);
            const double ratio = gain / split_info;
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_feature = f;
            }
        }
        if (best_feature < 0) {
            return false;
        }

        std::vector<int> zeros;
        std::vector<int> ones;
        for (int i : idx) {
            (features[i][best_feature] ? ones : zeros).push_back(i);
        }
        path.push_back(RuleCondition{best_feature, false});
        grow(zeros, depth + 1, path);
        path.back().value = true;
        grow(ones, depth + 1, path);
        path.pop_back();
        return true;
    }
};

}  // namespace

std::vector<DataRule> extract_data_rules(const LabeledSet& train, const NetworkParams& params,
                                         const RuleMinerConfig& cfg, ExecPolicy policy) {
    if (train.empty()) {
        throw ParameterError("extract_data_rules: empty training set");
    }
    const std::vector<Prediction> preds = predict_batch(params, train.examples, policy);

    std::vector<bool> fail(train.size());
    bool any_fail = false;
    for (std::size_t i = 0; i < train.size(); ++i) {
        fail[i] = preds[i].label != train.examples[i].true_label;
        any_fail = any_fail || fail[i];
    }
    if (!any_fail) {
        return {};
    }

    std::vector<std::vector<bool>> features(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        features[i] = binarize_pixels(train.examples[i].pixels, cfg.pool_factor, cfg.binarize_at);
    }

    RuleTreeBuilder builder{features, fail, cfg, static_cast<int>(features.front().size()), {}};
    std::vector<int> all(train.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<RuleCondition> path;
    builder.grow(all, 0, path);
    return builder.accepted;
}

std::string rule_to_text(const DataRule& rule, int grid_side) {
    std::ostringstream out;
    out << "fail :- ";
    for (std::size_t i = 0; i < rule.antecedent.size(); ++i) {
        const RuleCondition& cond = rule.antecedent[i];
        if (i > 0) {
            out << " & ";
        }
        out << "px(" << cond.feature / grid_side << "," << cond.feature % grid_side
            << ")=" << (cond.value ? 1 : 0);
    }
    out << " [conf=" << rule.confidence << ", supp=" << rule.support << "]";
    return out.str();
}

std::string export_rules(std::span<const DataRule> rules, int grid_side) {
    std::ostringstream out;
    for (const DataRule& rule : rules) {
        out << rule_to_text(rule, grid_side) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Failure forest
// ---------------------------------------------------------------------------

namespace {

struct ForestTrainer {
    const std::vector<std::array<double, kNumClasses>>& features;
    const std::vector<bool>& fail;
    int n_features;
    int max_depth;
    int mtry;

    struct NodeRef {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        bool leaf_fail = false;
    };

    std::vector<NodeRef> nodes;
    std::mt19937_64 rng{0};
    std::vector<int> feature_pool;

    int build(std::vector<int>& idx, int depth) {
        int fail_count = 0;
        for (int i : idx) {
            fail_count += fail[i] ? 1 : 0;
        }
        const int size = static_cast<int>(idx.size());

        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        if (depth >= max_depth || fail_count == 0 || fail_count == size || size < 2) {
            nodes[node_id].leaf_fail = 2 * fail_count > size;
            return node_id;
        }

        // Sample mtry distinct candidate features.
        for (int j = 0; j < mtry; ++j) {
            std::uniform_int_distribution<int> pick(j, n_features - 1);
            std::swap(feature_pool[j], feature_pool[pick(rng)]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, bool>> vals(size);
        for (int j = 0; j < mtry; ++j) {
            const int f = feature_pool[j];
            for (int k = 0; k < size; ++k) {
                vals[k] = {features[idx[k]][f], fail[idx[k]]};
            }
            std::sort(vals.begin(), vals.end());

            // Sweep thresholds between distinct adjacent values, tracking the
            // Gini-weighted impurity of the two sides.
            int left_n = 0;
            int left_fail = 0;
            for (int k = 0; k + 1 < size; ++k) {
                ++left_n;
                left_fail += vals[k].second ? 1 : 0;
                if (vals[k].first == vals[k + 1].first) {
                    continue;
                }
                const int right_n = size - left_n;
                const int right_fail = fail_count - left_fail;
                const double pl = double(left_fail) / left_n;
                const double pr = double(right_fail) / right_n;
                const double gini = left_n * pl * (1.0 - pl) + right_n * pr * (1.0 - pr);
                const double score = -gini;
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    best_threshold = 0.5 * (vals[k].first + vals[k + 1].first);
                }
            }
        }

        if (best_feature < 0) {
            nodes[node_id].leaf_fail = 2 * fail_count > size;
            return node_id;
        }

        std::vector<int> left_idx;
        std::vector<int> right_idx;
        for (int i : idx) {
            (features[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
        }
        if (left_idx.empty() || right_idx.empty()) {
            nodes[node_id].leaf_fail = 2 * fail_count > size;
            return node_id;
        }
        nodes[node_id].feature = best_feature;
        nodes[node_id].threshold = best_threshold;
        nodes[node_id].left = build(left_idx, depth + 1);
        nodes[node_id].right = build(right_idx, depth + 1);
        return node_id;
    }
};

}  // namespace

FailureForest train_failure_forest(const LabeledSet& verification, const NetworkParams& params,
                                   std::uint64_t seed, const FailureForestConfig& cfg,
                                   ExecPolicy policy) {
    if (verification.empty()) {
        throw ParameterError("train_failure_forest: empty verification set");
    }
    const std::vector<Prediction> preds = predict_batch(params, verification.examples, policy);

    const int n = static_cast<int>(verification.size());
    std::vector<std::array<double, kNumClasses>> features(n);
    std::vector<bool> fail(n);
    bool any_fail = false;
    for (int i = 0; i < n; ++i) {
        features[i] = preds[i].last_layer;
        fail[i] = preds[i].label != verification.examples[i].true_label;
        any_fail = any_fail || fail[i];
    }

    FailureForest forest;
    if (!any_fail) {
        forest.degenerate_pass_ = true;
        return forest;
    }

    const int n_features = params.output_dim;
    const int mtry = static_cast<int>(std::ceil(std::sqrt(double(n_features))));
    forest.trees_.resize(cfg.n_trees);

    // Bootstrap frame with failing examples replicated fail_oversample times.
    std::vector<int> frame;
    frame.reserve(n * 2);
    for (int i = 0; i < n; ++i) {
        const int copies = fail[i] ? std::max(1, cfg.fail_oversample) : 1;
        for (int c = 0; c < copies; ++c) {
            frame.push_back(i);
        }
    }

    auto build_tree = [&](int t) {
        ForestTrainer trainer{features, fail, n_features, cfg.max_depth, mtry, {}, {}, {}};
        trainer.rng.seed(derive_seed(seed, static_cast<std::uint64_t>(t)));
        trainer.feature_pool.resize(n_features);
        std::iota(trainer.feature_pool.begin(), trainer.feature_pool.end(), 0);

        std::vector<int> bootstrap(n);
        std::uniform_int_distribution<std::size_t> pick(0, frame.size() - 1);
        for (int& i : bootstrap) {
            i = frame[pick(trainer.rng)];
        }
        trainer.build(bootstrap, 0);

        FailureForest::Tree tree;
        tree.nodes.reserve(trainer.nodes.size());
        for (const auto& nd : trainer.nodes) {
            tree.nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.leaf_fail});
        }
        forest.trees_[t] = std::move(tree);
    };

    if (policy == ExecPolicy::serial) {
        for (int t = 0; t < cfg.n_trees; ++t) {
            build_tree(t);
        }
    } else {
#pragma omp parallel for schedule(static)
        for (int t = 0; t < cfg.n_trees; ++t) {
            build_tree(t);
        }
    }
    return forest;
}

int FailureForest::fail_votes(std::span<const double> features) const {
    int votes = 0;
    for (const Tree& tree : trees_) {
        int node = 0;
        while (tree.nodes[node].feature >= 0) {
            const Node& nd = tree.nodes[node];
            node = features[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        votes += tree.nodes[node].leaf_fail ? 1 : 0;
    }
    return votes;
}

bool FailureForest::predicts_fail(std::span<const double> features) const {
    if (degenerate_pass_ || trees_.empty()) {
        return false;
    }
    return 2 * fail_votes(features) > n_trees();
}

// ---------------------------------------------------------------------------
// Judging
// ---------------------------------------------------------------------------

Oracle build_oracle(const LabeledSet& train, const LabeledSet& verification,
                    const NetworkParams& params, OracleMode mode, std::uint64_t seed,
                    const RuleMinerConfig& miner_cfg, const FailureForestConfig& forest_cfg,
                    ExecPolicy policy) {
    Oracle oracle;
    oracle.mode = mode;
    oracle.domain.form_spec.validate();
    oracle.miner_cfg = miner_cfg;
    oracle.rules = extract_data_rules(train, params, miner_cfg, policy);
    oracle.forest = train_failure_forest(verification, params, seed, forest_cfg, policy);
    oracle.model_identity = params.identity;
    return oracle;
}

Verdict judge(const Oracle& oracle, const Example& x, const Prediction& pred,
              std::uint64_t params_identity) {
    if (oracle.model_identity != params_identity) {
        throw ConsistencyError("judge: oracle artifacts are stale for this model snapshot");
    }
    Verdict v;
    if (oracle.mode == OracleMode::dnn_os) {
        v.fired.domain = check_domain(oracle.domain, x.form_id, pred.label);
    }
    if (!oracle.rules.empty()) {
        const std::vector<bool> bits =
            binarize_pixels(x.pixels, oracle.miner_cfg.pool_factor, oracle.miner_cfg.binarize_at);
        for (const DataRule& rule : oracle.rules) {
            if (rule.matches(bits)) {
                v.fired.data = true;
                break;
            }
        }
    }
    v.fired.model = oracle.forest.predicts_fail(pred.last_layer);
    v.fail = v.fired.any();
    return v;
}

std::vector<Verdict> judge_batch(const Oracle& oracle, std::span<const Example> batch,
                                 std::span<const Prediction> preds,
                                 std::uint64_t params_identity, ExecPolicy policy) {
    if (batch.size() != preds.size()) {
        throw ParameterError("judge_batch: batch/prediction size mismatch");
    }
    if (oracle.model_identity != params_identity) {
        throw ConsistencyError("judge_batch: oracle artifacts are stale for this model snapshot");
    }
    std::vector<Verdict> verdicts(batch.size());
    if (policy == ExecPolicy::serial) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            verdicts[i] = judge(oracle, batch[i], preds[i], params_identity);
        }
        return verdicts;
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(batch.size()); ++i) {
        verdicts[i] = judge(oracle, batch[i], preds[i], params_identity);
    }
    return verdicts;
}

double predicted_accuracy(std::span<const Verdict> verdicts) {
    if (verdicts.empty()) {
        throw ParameterError("predicted_accuracy: no verdicts");
    }
    std::size_t pass = 0;
    for (const Verdict& v : verdicts) {
        pass += v.fail ? 0 : 1;
    }
    return double(pass) / double(verdicts.size());
}

}  // namespace daic
