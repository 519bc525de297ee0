#include "daic/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

namespace daic {

FormSpec FormSpec::defaults() {
    FormSpec spec;
    spec.allowed[0] = {0, 3, 6, 8, 9};
    spec.allowed[1] = {1, 4, 7};
    spec.allowed[2] = {2, 5};
    return spec;
}

bool FormSpec::allows(FormId form, int label) const {
    const auto& set = allowed[static_cast<std::size_t>(form)];
    return std::find(set.begin(), set.end(), label) != set.end();
}

FormId FormSpec::form_of(int label) const {
    for (int f = 0; f < kNumForms; ++f) {
        if (allows(static_cast<FormId>(f), label)) {
            return static_cast<FormId>(f);
        }
    }
    throw ConsistencyError("form_of: label " + std::to_string(label) +
                           " not covered by any form");
}

void FormSpec::validate() const {
    std::set<int> seen;
    for (const auto& set : allowed) {
        for (int label : set) {
            if (label < 0 || label >= kNumClasses) {
                throw ConfigError("form spec: label out of range: " + std::to_string(label));
            }
            if (!seen.insert(label).second) {
                throw ConfigError("form spec: label in two forms: " + std::to_string(label));
            }
        }
    }
    if (seen.size() != kNumClasses) {
        throw ConfigError("form spec: forms do not cover all 10 classes");
    }
}

int ShiftSpec::apply(int label) const {
    for (const auto& [a, b] : swap_pairs) {
        if (label == a) {
            return b;
        }
        if (label == b) {
            return a;
        }
    }
    return label;
}

void ShiftSpec::validate() const {
    std::set<int> seen;
    for (const auto& [a, b] : swap_pairs) {
        if (a < 0 || a >= kNumClasses || b < 0 || b >= kNumClasses || a == b) {
            throw ConfigError("shift spec: invalid pair " + std::to_string(a) + ":" +
                              std::to_string(b));
        }
        if (!seen.insert(a).second || !seen.insert(b).second) {
            throw ConfigError("shift spec: pairs are not disjoint");
        }
    }
}

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) {
        throw IoError("truncated IDX header in " + path);
    }
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_be32(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4] = {
        static_cast<unsigned char>(value >> 24),
        static_cast<unsigned char>(value >> 16),
        static_cast<unsigned char>(value >> 8),
        static_cast<unsigned char>(value),
    };
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

LabeledSet load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) {
        throw IoError("cannot open image file: " + images_path);
    }
    std::ifstream labf(labels_path, std::ios::binary);
    if (!labf) {
        throw IoError("cannot open label file: " + labels_path);
    }

    const std::uint32_t img_magic = read_be32(imgf, images_path);
    if (img_magic != kImageMagic) {
        throw FormatError("bad image magic in " + images_path + ": expected 0x803");
    }
    const std::uint32_t n_images = read_be32(imgf, images_path);
    const std::uint32_t rows = read_be32(imgf, images_path);
    const std::uint32_t cols = read_be32(imgf, images_path);

    const std::uint32_t lab_magic = read_be32(labf, labels_path);
    if (lab_magic != kLabelMagic) {
        throw FormatError("bad label magic in " + labels_path + ": expected 0x801");
    }
    const std::uint32_t n_labels = read_be32(labf, labels_path);

    if (n_images != n_labels) {
        throw ConsistencyError("image/label count mismatch: " + std::to_string(n_images) +
                               " vs " + std::to_string(n_labels));
    }

    const std::size_t pixels_per = std::size_t(rows) * cols;
    std::vector<unsigned char> img_bytes(std::size_t(n_images) * pixels_per);
    imgf.read(reinterpret_cast<char*>(img_bytes.data()),
              static_cast<std::streamsize>(img_bytes.size()));
    if (static_cast<std::size_t>(imgf.gcount()) != img_bytes.size()) {
        throw IoError("truncated image data in " + images_path);
    }
    std::vector<unsigned char> lab_bytes(n_labels);
    labf.read(reinterpret_cast<char*>(lab_bytes.data()),
              static_cast<std::streamsize>(lab_bytes.size()));
    if (static_cast<std::size_t>(labf.gcount()) != lab_bytes.size()) {
        throw IoError("truncated label data in " + labels_path);
    }

    const FormSpec forms = FormSpec::defaults();
    LabeledSet set;
    set.role = SetRole::pool;
    set.examples.resize(n_images);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        Example& ex = set.examples[i];
        ex.pixels.resize(pixels_per);
        const unsigned char* src = img_bytes.data() + std::size_t(i) * pixels_per;
        for (std::size_t p = 0; p < pixels_per; ++p) {
            ex.pixels[p] = src[p] / 255.0;
        }
        const int label = lab_bytes[i];
        if (label >= kNumClasses) {
            throw FormatError("label out of range at record " + std::to_string(i) + ": " +
                              std::to_string(label));
        }
        ex.true_label = label;
        ex.form_id = forms.form_of(label);
        ex.origin_cycle = 0;
    }
    return set;
}

void write_idx(const LabeledSet& set, const std::string& images_path,
               const std::string& labels_path) {
    if (set.empty()) {
        throw ParameterError("write_idx: empty set");
    }
    const std::size_t pixels_per = set.examples.front().pixels.size();
    const auto side = static_cast<std::uint32_t>(std::lround(std::sqrt(double(pixels_per))));
    if (std::size_t(side) * side != pixels_per) {
        throw ParameterError("write_idx: pixel count is not a square");
    }

    std::ofstream imgf(images_path, std::ios::binary);
    if (!imgf) {
        throw IoError("cannot write image file: " + images_path);
    }
    std::ofstream labf(labels_path, std::ios::binary);
    if (!labf) {
        throw IoError("cannot write label file: " + labels_path);
    }

    write_be32(imgf, kImageMagic);
    write_be32(imgf, static_cast<std::uint32_t>(set.size()));
    write_be32(imgf, side);
    write_be32(imgf, side);
    write_be32(labf, kLabelMagic);
    write_be32(labf, static_cast<std::uint32_t>(set.size()));

    std::vector<unsigned char> row(pixels_per);
    for (const Example& ex : set.examples) {
        if (ex.pixels.size() != pixels_per) {
            throw ConsistencyError("write_idx: ragged pixel vectors");
        }
        if (!ex.labeled()) {
            throw ConsistencyError("write_idx: unlabeled example");
        }
        for (std::size_t p = 0; p < pixels_per; ++p) {
            row[p] = static_cast<unsigned char>(std::lround(ex.pixels[p] * 255.0));
        }
        imgf.write(reinterpret_cast<const char*>(row.data()),
                   static_cast<std::streamsize>(row.size()));
        const auto lab = static_cast<unsigned char>(ex.true_label);
        labf.write(reinterpret_cast<const char*>(&lab), 1);
    }
    if (!imgf || !labf) {
        throw IoError("short write while emitting IDX files");
    }
}

Splits make_splits(const LabeledSet& pool, std::uint64_t seed,
                   std::size_t train_size, std::size_t verification_size) {
    if (pool.size() < train_size + verification_size) {
        throw CapacityError("make_splits: pool of " + std::to_string(pool.size()) +
                            " cannot supply " + std::to_string(train_size) + "+" +
                            std::to_string(verification_size) + " examples");
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    Splits out;
    out.train.role = SetRole::train;
    out.verification.role = SetRole::verification;
    out.operational_pool.role = SetRole::pool;
    out.train.examples.reserve(train_size);
    out.verification.examples.reserve(verification_size);
    out.operational_pool.examples.reserve(pool.size() - train_size - verification_size);

    std::size_t i = 0;
    for (; i < train_size; ++i) {
        out.train.examples.push_back(pool.examples[order[i]]);
    }
    for (; i < train_size + verification_size; ++i) {
        out.verification.examples.push_back(pool.examples[order[i]]);
    }
    for (; i < pool.size(); ++i) {
        out.operational_pool.examples.push_back(pool.examples[order[i]]);
    }
    return out;
}

std::vector<Example> draw_operational_batch(const LabeledSet& pool, int cycle,
                                            const ShiftSpec& shift, std::uint64_t seed,
                                            std::size_t batch_size) {
    if (cycle < 1) {
        throw ParameterError("draw_operational_batch: cycle must be >= 1");
    }
    const std::size_t offset = static_cast<std::size_t>(cycle - 1) * batch_size;
    if (offset + batch_size > pool.size()) {
        throw CapacityError("operational pool exhausted at cycle " + std::to_string(cycle) +
                            ": need " + std::to_string(offset + batch_size) + ", have " +
                            std::to_string(pool.size()));
    }

    const FormSpec forms = FormSpec::defaults();
    std::vector<Example> batch(pool.examples.begin() + static_cast<std::ptrdiff_t>(offset),
                               pool.examples.begin() +
                                   static_cast<std::ptrdiff_t>(offset + batch_size));
    std::mt19937_64 rng(seed);
    std::shuffle(batch.begin(), batch.end(), rng);

    const bool shifted = shift.active(cycle);
    for (Example& ex : batch) {
        if (shifted) {
            ex.true_label = shift.apply(ex.true_label);
            ex.form_id = forms.form_of(ex.true_label);
        }
        ex.origin_cycle = cycle;
    }
    return batch;
}

std::vector<double> synth_prototype(int class_id) {
    // Fixed per-class vector, independent of any caller seed.
    std::mt19937_64 rng(derive_seed(0xda1c0000u, static_cast<std::uint64_t>(class_id)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> proto(64);
    for (double& v : proto) {
        v = unit(rng);
    }
    return proto;
}

LabeledSet synth_generate(int n, int n_classes, double noise, std::uint64_t seed) {
    if (n_classes < 1 || n_classes > kNumClasses) {
        throw ParameterError("synth_generate: n_classes must be in 1..10");
    }
    if (n < n_classes) {
        throw ParameterError("synth_generate: n must be >= n_classes");
    }
    if (noise < 0.0 || noise > 0.5) {
        throw ParameterError("synth_generate: noise must be in [0, 0.5]");
    }

    std::vector<std::vector<double>> protos(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        protos[c] = synth_prototype(c);
    }

    const FormSpec forms = FormSpec::defaults();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-noise, noise);

    LabeledSet set;
    set.role = SetRole::pool;
    set.examples.resize(n);
    for (int i = 0; i < n; ++i) {
        const int c = i % n_classes;  // balanced within 1
        Example& ex = set.examples[i];
        ex.pixels = protos[c];
        if (noise > 0.0) {
            for (double& v : ex.pixels) {
                v = std::clamp(v + jitter(rng), 0.0, 1.0);
            }
        }
        ex.true_label = c;
        ex.form_id = forms.form_of(c);
    }
    std::shuffle(set.examples.begin(), set.examples.end(), rng);
    return set;
}

}  // namespace daic
