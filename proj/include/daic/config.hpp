#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "daic/cycle.hpp"
#include "daic/glyphs.hpp"

namespace daic {

enum class DatasetKind : std::uint8_t { mnist, synthetic };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::synthetic;
    std::string mnist_images;
    std::string mnist_labels;
    int synthetic_size = 10000;
    std::uint64_t synthetic_seed = 20260801;
    GlyphParams glyph;

    bool operator==(const DatasetConfig&) const = default;
};

// Everything a run needs; defaults reproduce the stock experiment.
struct ExperimentConfig {
    DatasetConfig dataset;
    int cycles = 8;
    int repetitions = 5;
    std::size_t train_size = 1000;
    std::size_t verification_size = 500;
    std::size_t batch_size = 1000;
    OracleMode oracle_mode = OracleMode::dnn_os;
    TriggerPolicy trigger;
    RetrainPolicy retrain;
    SamplingPlan sampling;
    ShiftSpec shift;
    TrainConfig train;
    ExecPolicy exec = ExecPolicy::parallel;
    std::uint64_t master_seed = 7;
    std::string output_dir = "out";
    // Diagnostic hook: remaps true labels in reported actual accuracy only.
    std::vector<std::pair<int, int>> report_truth_remap;

    void validate() const;
    ExperimentPlan to_plan() const;

    bool operator==(const ExperimentConfig&) const;
};

// Flat `key = value` format with dotted section keys; '#' starts a comment.
// Unknown keys and invariant violations raise ConfigError naming the key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization; parse(serialize(cfg)) == cfg.
std::string serialize_config(const ExperimentConfig& config);

std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace daic
