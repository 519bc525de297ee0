#include "daic/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "daic/common.hpp"

namespace daic {

void SamplingPlan::validate() const {
    if (budget < 1) {
        throw ConfigError("sampling.budget must be >= 1");
    }
    if (!(random_fraction > 0.0) || random_fraction > 1.0) {
        throw ConfigError("sampling.random_fraction must be in (0, 1]");
    }
    if (!(weight_floor > 0.0)) {
        throw ConfigError("sampling.weight_floor must be > 0");
    }
}

std::vector<double> compute_weights(std::span<const Prediction> preds, double floor) {
    if (preds.empty()) {
        throw ParameterError("compute_weights: no predictions");
    }
    std::vector<double> w(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        w[i] = (1.0 - preds[i].confidence) + floor;
    }
    return w;
}

namespace {

// Madow systematic PPS without replacement over a randomly ordered frame.
// Units whose scaled weight reaches the step size are selected with certainty
// and peeled off first (possibly over several rounds, since removing them
// shrinks the step); the rest are hit at most once by the systematic walk.
// The realized inclusion probabilities track k * w_i / total, which is what
// the caller's pi formula assumes.
std::vector<int> systematic_pps(const std::vector<int>& frame,
                                std::span<const double> weights, int k,
                                std::mt19937_64& rng) {
    std::vector<int> chosen;
    chosen.reserve(k);
    std::vector<int> pool = frame;

    while (k > 0 && !pool.empty()) {
        if (k >= static_cast<int>(pool.size())) {
            chosen.insert(chosen.end(), pool.begin(), pool.end());
            break;
        }
        double total = 0.0;
        for (int i : pool) {
            total += weights[i];
        }

        std::vector<int> walkers;
        walkers.reserve(pool.size());
        bool peeled = false;
        for (int i : pool) {
            if (double(k) * weights[i] >= total) {
                chosen.push_back(i);
                --k;
                peeled = true;
            } else {
                walkers.push_back(i);
            }
        }
        pool = std::move(walkers);
        if (peeled) {
            continue;
        }

        std::shuffle(pool.begin(), pool.end(), rng);
        const double step = total / k;
        std::uniform_real_distribution<double> offset(0.0, step);
        double target = offset(rng);
        double cum = 0.0;
        int selected = 0;
        for (int i : pool) {
            cum += weights[i];
            if (target < cum && selected < k) {
                chosen.push_back(i);
                target += step;
                ++selected;
            }
        }
        // Floating-point slack on the last step can leave a unit short.
        for (std::size_t j = pool.size(); selected < k && j > 0; --j) {
            const int i = pool[j - 1];
            if (std::find(chosen.end() - selected, chosen.end(), i) == chosen.end()) {
                chosen.push_back(i);
                ++selected;
            }
        }
        break;
    }
    return chosen;
}

}  // namespace

std::vector<SampledUnit> draw_sample(std::span<const Example> batch,
                                     std::span<const Prediction> preds,
                                     const SamplingPlan& plan) {
    plan.validate();
    if (batch.size() != preds.size()) {
        throw ParameterError("draw_sample: batch/prediction size mismatch");
    }
    if (batch.empty()) {
        throw ParameterError("draw_sample: empty batch");
    }
    const int population = static_cast<int>(batch.size());

    // Budget at or beyond the population degenerates to a census.
    if (plan.budget >= population) {
        std::vector<SampledUnit> units(population);
        for (int i = 0; i < population; ++i) {
            units[i].index = i;
            units[i].predicted_label = preds[i].label;
            units[i].inclusion_prob = 1.0;
        }
        return units;
    }

    const int n_random = static_cast<int>(std::llround(plan.budget * plan.random_fraction));
    const int n_weighted = plan.budget - n_random;
    const std::vector<double> weights = compute_weights(preds, plan.weight_floor);
    const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);

    std::mt19937_64 rng(plan.seed);

    std::vector<int> indices(population);
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<int> phase1;
    phase1.reserve(n_random);
    std::sample(indices.begin(), indices.end(), std::back_inserter(phase1), n_random, rng);

    std::vector<char> taken(population, 0);
    for (int i : phase1) {
        taken[i] = 1;
    }
    std::vector<int> remainder;
    remainder.reserve(population - n_random);
    for (int i = 0; i < population; ++i) {
        if (!taken[i]) {
            remainder.push_back(i);
        }
    }

    std::vector<int> phase2;
    if (n_weighted > 0) {
        phase2 = systematic_pps(remainder, weights, n_weighted, rng);
    }

    const double srs_prob = double(n_random) / population;
    auto make_unit = [&](int i) {
        SampledUnit unit;
        unit.index = i;
        unit.predicted_label = preds[i].label;
        unit.inclusion_prob =
            std::min(1.0, srs_prob + double(n_weighted) * weights[i] / total_weight);
        return unit;
    };

    std::vector<SampledUnit> units;
    units.reserve(phase1.size() + phase2.size());
    for (int i : phase1) {
        units.push_back(make_unit(i));
    }
    for (int i : phase2) {
        units.push_back(make_unit(i));
    }
    return units;
}

void label_units(std::vector<SampledUnit>& units, std::span<const int> truth_labels) {
    for (SampledUnit& unit : units) {
        if (unit.index < 0 || static_cast<std::size_t>(unit.index) >= truth_labels.size()) {
            throw ConsistencyError("label_units: no ground truth for batch index " +
                                   std::to_string(unit.index));
        }
        unit.true_label = truth_labels[unit.index];
        unit.correct = unit.predicted_label == unit.true_label;
        unit.labeled = true;
    }
}

AccuracyEstimate estimate_accuracy(std::span<const SampledUnit> units) {
    if (units.empty()) {
        throw ParameterError("estimate_accuracy: no sampled units");
    }
    double num = 0.0;
    double den = 0.0;
    for (const SampledUnit& unit : units) {
        if (!unit.labeled) {
            throw StateError("estimate_accuracy: unlabeled unit at batch index " +
                             std::to_string(unit.index));
        }
        if (!(unit.inclusion_prob > 0.0)) {
            throw StateError("estimate_accuracy: nonpositive inclusion probability");
        }
        num += (unit.correct ? 1.0 : 0.0) / unit.inclusion_prob;
        den += 1.0 / unit.inclusion_prob;
    }
    AccuracyEstimate est;
    est.point = num / den;
    est.n_labeled = static_cast<int>(units.size());

    if (units.size() > 1) {
        std::vector<double> residuals(units.size());
        for (std::size_t i = 0; i < units.size(); ++i) {
            residuals[i] = ((units[i].correct ? 1.0 : 0.0) - est.point) / units[i].inclusion_prob;
        }
        const double mean =
            std::accumulate(residuals.begin(), residuals.end(), 0.0) / residuals.size();
        double ss = 0.0;
        for (double r : residuals) {
            ss += (r - mean) * (r - mean);
        }
        const double sd = std::sqrt(ss / double(residuals.size() - 1));
        est.stderr_proxy = sd / std::sqrt(double(units.size()));
    }
    return est;
}

}  // namespace daic
