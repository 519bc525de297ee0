#pragma once

#include <span>
#include <string>
#include <vector>

#include "daic/config.hpp"
#include "daic/cycle.hpp"

namespace daic {

inline constexpr const char* kRecordsCsvHeader =
    "cycle,repetition,verification_acc,actual_acc,predicted_acc,estimated_acc,"
    "triggered,n_labeled,policy_applied";

std::string records_to_csv(std::span<const CycleRecord> records);
std::vector<CycleRecord> parse_records_csv(const std::string& text);

// Per-cycle aggregation over repetitions with min/max interval bands.
std::string summary_to_csv(std::span<const CycleRecord> records);

struct RunOutputs {
    std::string records_csv;
    std::string summary_csv;
    std::string manifest_json;
    std::string config_echo;
};

// Writes records.csv, summary.csv, manifest.json, and config_echo.conf under
// output_dir (created if missing); returns the paths.
RunOutputs emit_results(std::span<const CycleRecord> records, const ExperimentConfig& config,
                        double wall_seconds, const std::string& output_dir);

}  // namespace daic
