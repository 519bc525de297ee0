#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "daic/common.hpp"

namespace daic {

inline constexpr int kNumClasses = 10;

// Input source form. Which digits a form may contain is given by FormSpec.
enum class FormId : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr int kNumForms = 3;

// Maps each form to the set of class labels it may legally contain. The three
// sets must partition {0..9}.
struct FormSpec {
    std::array<std::vector<int>, kNumForms> allowed;

    // A: digits without straight lines, B: digits with straight lines only,
    // C: the remaining digits.
    static FormSpec defaults();

    bool allows(FormId form, int label) const;
    FormId form_of(int label) const;
    void validate() const;  // throws ConfigError unless the sets partition {0..9}
};

struct ShiftSpec {
    std::vector<std::pair<int, int>> swap_pairs{{2, 7}};
    int start_cycle = 4;

    bool active(int cycle) const { return cycle >= start_cycle && !swap_pairs.empty(); }
    // Partner of `label` under the swap pairs, or `label` itself.
    int apply(int label) const;
    void validate() const;  // pairs must be disjoint, labels in range
};

struct Example {
    std::vector<double> pixels;  // row-major, values in [0,1]
    int true_label = -1;         // -1 while unlabeled
    FormId form_id = FormId::A;
    int origin_cycle = 0;

    bool labeled() const { return true_label >= 0; }
};

enum class SetRole : std::uint8_t { train, verification, pool };

struct LabeledSet {
    std::vector<Example> examples;
    SetRole role = SetRole::pool;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

struct Splits {
    LabeledSet train;
    LabeledSet verification;
    LabeledSet operational_pool;
};

// MNIST IDX ingestion. Image files start with big-endian magic 0x00000803
// followed by count/rows/cols, label files with 0x00000801 followed by count.
// Pixels are scaled by 1/255 and the form id is assigned from the default
// FormSpec.
LabeledSet load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx; pixels are quantized back to bytes.
void write_idx(const LabeledSet& set, const std::string& images_path,
               const std::string& labels_path);

// Disjoint uniform-random splits of train_size / verification_size / rest.
Splits make_splits(const LabeledSet& pool, std::uint64_t seed,
                   std::size_t train_size = 1000, std::size_t verification_size = 500);

// One operational batch: batch number `cycle` (1-based) slices the next
// `batch_size` unconsumed pool examples, shuffles them, and applies the label
// shift when active. Form ids follow the (possibly shifted) true label.
std::vector<Example> draw_operational_batch(const LabeledSet& pool, int cycle,
                                            const ShiftSpec& shift, std::uint64_t seed,
                                            std::size_t batch_size = 1000);

// Fast 64-dimensional test fixture: fixed per-class prototypes plus uniform
// noise of the given amplitude, clamped to [0,1]. Classes balanced within 1.
LabeledSet synth_generate(int n, int n_classes, double noise, std::uint64_t seed);

// The fixed prototype vector synth_generate perturbs; exposed for tests.
std::vector<double> synth_prototype(int class_id);

}  // namespace daic
