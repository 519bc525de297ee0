#include "daic/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "daic/common.hpp"

namespace daic {

namespace {

std::string acc6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

AppliedPolicy policy_from_string(const std::string& s) {
    if (s == "none") {
        return AppliedPolicy::none;
    }
    if (s == "append") {
        return AppliedPolicy::append;
    }
    if (s == "replace") {
        return AppliedPolicy::replace;
    }
    throw FormatError("unknown policy_applied value: '" + s + "'");
}

}  // namespace

std::string records_to_csv(std::span<const CycleRecord> records) {
    std::ostringstream out;
    out << kRecordsCsvHeader << "\n";
    for (const CycleRecord& r : records) {
        out << r.cycle << "," << r.repetition << "," << acc6(r.verification_acc) << ","
            << acc6(r.actual_acc) << "," << acc6(r.predicted_acc) << ","
            << (r.estimated_acc ? acc6(*r.estimated_acc) : std::string()) << ","
            << (r.triggered ? 1 : 0) << "," << r.n_labeled << "," << to_string(r.policy_applied)
            << "\n";
    }
    return out.str();
}

std::vector<CycleRecord> parse_records_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kRecordsCsvHeader) {
        throw FormatError("records CSV: missing or unexpected header");
    }
    std::vector<CycleRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 9) {
            throw FormatError("records CSV: expected 9 fields, got " +
                              std::to_string(f.size()));
        }
        CycleRecord r;
        r.cycle = std::stoi(f[0]);
        r.repetition = std::stoi(f[1]);
        r.verification_acc = std::stod(f[2]);
        r.actual_acc = std::stod(f[3]);
        r.predicted_acc = std::stod(f[4]);
        if (!f[5].empty()) {
            r.estimated_acc = std::stod(f[5]);
        }
        r.triggered = f[6] == "1";
        r.n_labeled = std::stoi(f[7]);
        r.policy_applied = policy_from_string(f[8]);
        if (r.triggered != r.estimated_acc.has_value()) {
            throw ConsistencyError("records CSV: estimated_acc presence disagrees with trigger");
        }
        records.push_back(r);
    }
    return records;
}

std::string summary_to_csv(std::span<const CycleRecord> records) {
    std::map<int, std::vector<const CycleRecord*>> by_cycle;
    for (const CycleRecord& r : records) {
        by_cycle[r.cycle].push_back(&r);
    }

    std::ostringstream out;
    out << "cycle,repetitions,verification_mean,actual_mean,actual_min,actual_max,"
           "predicted_mean,predicted_min,predicted_max,estimated_mean,n_triggered,"
           "total_labeled\n";
    for (const auto& [cycle, rows] : by_cycle) {
        double ver = 0.0;
        double act = 0.0;
        double act_min = 1.0;
        double act_max = 0.0;
        double pred = 0.0;
        double pred_min = 1.0;
        double pred_max = 0.0;
        double est_sum = 0.0;
        int est_n = 0;
        int n_triggered = 0;
        long total_labeled = 0;
        for (const CycleRecord* r : rows) {
            ver += r->verification_acc;
            act += r->actual_acc;
            act_min = std::min(act_min, r->actual_acc);
            act_max = std::max(act_max, r->actual_acc);
            pred += r->predicted_acc;
            pred_min = std::min(pred_min, r->predicted_acc);
            pred_max = std::max(pred_max, r->predicted_acc);
            if (r->estimated_acc) {
                est_sum += *r->estimated_acc;
                ++est_n;
            }
            n_triggered += r->triggered ? 1 : 0;
            total_labeled += r->n_labeled;
        }
        const double n = double(rows.size());
        out << cycle << "," << rows.size() << "," << acc6(ver / n) << "," << acc6(act / n) << ","
            << acc6(act_min) << "," << acc6(act_max) << "," << acc6(pred / n) << ","
            << acc6(pred_min) << "," << acc6(pred_max) << ","
            << (est_n > 0 ? acc6(est_sum / est_n) : std::string()) << "," << n_triggered << ","
            << total_labeled << "\n";
    }
    return out.str();
}

RunOutputs emit_results(std::span<const CycleRecord> records, const ExperimentConfig& config,
                        double wall_seconds, const std::string& output_dir) {
    if (records.empty()) {
        throw ParameterError("emit_results: no records");
    }
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + output_dir + " (" + ec.message() +
                      ")");
    }

    RunOutputs paths;
    paths.records_csv = (std::filesystem::path(output_dir) / "records.csv").string();
    paths.summary_csv = (std::filesystem::path(output_dir) / "summary.csv").string();
    paths.manifest_json = (std::filesystem::path(output_dir) / "manifest.json").string();
    paths.config_echo = (std::filesystem::path(output_dir) / "config_echo.conf").string();

    auto write_file = [](const std::string& path, const std::string& body) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw IoError("cannot write " + path);
        }
        out << body;
        if (!out) {
            throw IoError("short write to " + path);
        }
    };

    write_file(paths.records_csv, records_to_csv(records));
    write_file(paths.summary_csv, summary_to_csv(records));
    write_file(paths.config_echo, serialize_config(config));

    nlohmann::json manifest;
    manifest["master_seed"] = config.master_seed;
    manifest["config_hash"] = config_hash(config);
    manifest["wall_seconds"] = wall_seconds;
    manifest["n_records"] = records.size();
    manifest["cycles"] = config.cycles;
    manifest["repetitions"] = config.repetitions;
    manifest["oracle_mode"] =
        config.oracle_mode == OracleMode::dnn_os ? "dnn_os" : "baseline";
    write_file(paths.manifest_json, manifest.dump(2) + "\n");
    return paths;
}

}  // namespace daic
