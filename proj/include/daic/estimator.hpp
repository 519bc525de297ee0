#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "daic/dataset.hpp"
#include "daic/model.hpp"

namespace daic {

struct SamplingPlan {
    int budget = 500;              // n
    double random_fraction = 0.5;  // p: share drawn by simple random sampling
    double weight_floor = 1e-6;    // keeps confidence-1.0 units selectable
    std::uint64_t seed = 0;

    void validate() const;
};

struct SampledUnit {
    int index = -1;  // position in the operational batch
    int predicted_label = -1;
    int true_label = -1;  // filled by labeling
    bool labeled = false;
    bool correct = false;
    double inclusion_prob = 0.0;
};

struct AccuracyEstimate {
    double point = 0.0;
    int n_labeled = 0;
    double stderr_proxy = 0.0;  // diagnostic only
};

// w_i = (1 - confidence_i) + floor; strictly positive.
std::vector<double> compute_weights(std::span<const Prediction> preds, double floor = 1e-6);

// Two-phase design: n1 = round(n*p) units by SRS without replacement, then
// n2 = n - n1 units from the remainder by systematic
// probability-proportional-to-size sampling without replacement over a
// randomly ordered frame (certainty units peeled off first). Every sampled
// unit records the approximate overall inclusion probability
//   pi_i = min(1, n1/N + n2 * w_i / W)
// with W the total weight of the full batch. A budget >= N degenerates to a
// census with pi = 1.
std::vector<SampledUnit> draw_sample(std::span<const Example> batch,
                                     std::span<const Prediction> preds,
                                     const SamplingPlan& plan);

// Fill true labels from the ground-truth source (the simulated human oracle)
// and mark correctness. Idempotent.
void label_units(std::vector<SampledUnit>& units, std::span<const int> truth_labels);

// Hajek ratio estimator: (sum correct_i/pi_i) / (sum 1/pi_i). Requires all
// units labeled with positive inclusion probabilities.
AccuracyEstimate estimate_accuracy(std::span<const SampledUnit> units);

}  // namespace daic
