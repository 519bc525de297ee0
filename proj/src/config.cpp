#include "daic/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "daic/common.hpp"

namespace daic {

void ExperimentConfig::validate() const {
    if (cycles < 1) {
        throw ConfigError("cycles must be >= 1");
    }
    if (repetitions < 1) {
        throw ConfigError("repetitions must be >= 1");
    }
    if (train_size < 1 || verification_size < 1 || batch_size < 1) {
        throw ConfigError("splits.train_size, splits.verification_size and batch.size must be >= 1");
    }
    if (dataset.kind == DatasetKind::mnist &&
        (dataset.mnist_images.empty() || dataset.mnist_labels.empty())) {
        throw ConfigError("dataset.mnist_images and dataset.mnist_labels are required for mnist");
    }
    if (dataset.kind == DatasetKind::synthetic && dataset.synthetic_size < 1) {
        throw ConfigError("dataset.synthetic_size must be >= 1");
    }
    if (dataset.glyph.jitter < 0.0 || dataset.glyph.noise < 0.0) {
        throw ConfigError("dataset.glyph_jitter and dataset.glyph_noise must be >= 0");
    }
    trigger.validate();
    retrain.validate();
    sampling.validate();
    shift.validate();
    train.validate();
    for (const auto& [from, to] : report_truth_remap) {
        if (from < 0 || from >= kNumClasses || to < 0 || to >= kNumClasses) {
            throw ConfigError("report.truth_remap labels must be in 0..9");
        }
    }
}

ExperimentPlan ExperimentConfig::to_plan() const {
    ExperimentPlan plan;
    plan.cycle.trigger = trigger;
    plan.cycle.retrain = retrain;
    plan.cycle.sampling = sampling;
    plan.cycle.shift = shift;
    plan.cycle.train = train;
    plan.cycle.oracle_mode = oracle_mode;
    plan.cycle.batch_size = batch_size;
    plan.cycle.exec = exec;
    plan.cycle.report_truth_remap = report_truth_remap;
    plan.cycles = cycles;
    plan.repetitions = repetitions;
    plan.train_size = train_size;
    plan.verification_size = verification_size;
    plan.master_seed = master_seed;
    return plan;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return dataset == o.dataset && cycles == o.cycles && repetitions == o.repetitions &&
           train_size == o.train_size && verification_size == o.verification_size &&
           batch_size == o.batch_size && oracle_mode == o.oracle_mode &&
           trigger.divergence_threshold == o.trigger.divergence_threshold &&
           trigger.minimum_accuracy == o.trigger.minimum_accuracy &&
           retrain.mode == o.retrain.mode && retrain.k == o.retrain.k &&
           retrain.new_label_split == o.retrain.new_label_split &&
           sampling.budget == o.sampling.budget &&
           sampling.random_fraction == o.sampling.random_fraction &&
           sampling.weight_floor == o.sampling.weight_floor &&
           shift.swap_pairs == o.shift.swap_pairs && shift.start_cycle == o.shift.start_cycle &&
           train.epochs == o.train.epochs && train.batch_size == o.train.batch_size &&
           train.learning_rate == o.train.learning_rate && train.momentum == o.train.momentum &&
           exec == o.exec && master_seed == o.master_seed && output_dir == o.output_dir &&
           report_truth_remap == o.report_truth_remap;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for " + key + " is not an integer: '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for " + key + " is not an unsigned integer: '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value for " + key + " is not a number: '" + value + "'");
    }
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& key, const std::string& value) {
    std::vector<std::pair<int, int>> pairs;
    if (trim(value).empty()) {
        return pairs;
    }
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("value for " + key + " must be a:b pairs, got '" + item + "'");
        }
        pairs.emplace_back(static_cast<int>(parse_int(key, trim(item.substr(0, colon)))),
                           static_cast<int>(parse_int(key, trim(item.substr(colon + 1)))));
    }
    return pairs;
}

std::string pairs_to_string(const std::vector<std::pair<int, int>>& pairs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0) {
            out << ",";
        }
        out << pairs[i].first << ":" << pairs[i].second;
    }
    return out.str();
}

std::string real_to_string(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset.kind") {
        if (value == "mnist") {
            cfg.dataset.kind = DatasetKind::mnist;
        } else if (value == "synthetic") {
            cfg.dataset.kind = DatasetKind::synthetic;
        } else {
            throw ConfigError("dataset.kind must be mnist or synthetic, got '" + value + "'");
        }
    } else if (key == "dataset.mnist_images") {
        cfg.dataset.mnist_images = value;
    } else if (key == "dataset.mnist_labels") {
        cfg.dataset.mnist_labels = value;
    } else if (key == "dataset.synthetic_size") {
        cfg.dataset.synthetic_size = static_cast<int>(parse_int(key, value));
    } else if (key == "dataset.synthetic_seed") {
        cfg.dataset.synthetic_seed = parse_u64(key, value);
    } else if (key == "dataset.glyph_jitter") {
        cfg.dataset.glyph.jitter = parse_real(key, value);
    } else if (key == "dataset.glyph_noise") {
        cfg.dataset.glyph.noise = parse_real(key, value);
    } else if (key == "cycles") {
        cfg.cycles = static_cast<int>(parse_int(key, value));
    } else if (key == "repetitions") {
        cfg.repetitions = static_cast<int>(parse_int(key, value));
    } else if (key == "splits.train_size") {
        cfg.train_size = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "splits.verification_size") {
        cfg.verification_size = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "batch.size") {
        cfg.batch_size = static_cast<std::size_t>(parse_int(key, value));
    } else if (key == "oracle.mode") {
        if (value == "dnn_os") {
            cfg.oracle_mode = OracleMode::dnn_os;
        } else if (value == "baseline") {
            cfg.oracle_mode = OracleMode::baseline;
        } else {
            throw ConfigError("oracle.mode must be dnn_os or baseline, got '" + value + "'");
        }
    } else if (key == "trigger.divergence_threshold") {
        cfg.trigger.divergence_threshold = parse_real(key, value);
    } else if (key == "trigger.minimum_accuracy") {
        cfg.trigger.minimum_accuracy = parse_real(key, value);
    } else if (key == "retrain.mode") {
        if (value == "append") {
            cfg.retrain.mode = RetrainMode::append;
        } else if (value == "replace_after_k") {
            cfg.retrain.mode = RetrainMode::replace_after_k;
        } else {
            throw ConfigError("retrain.mode must be append or replace_after_k, got '" + value +
                              "'");
        }
    } else if (key == "retrain.k") {
        cfg.retrain.k = static_cast<int>(parse_int(key, value));
    } else if (key == "retrain.new_label_split") {
        cfg.retrain.new_label_split = parse_real(key, value);
    } else if (key == "sampling.budget") {
        cfg.sampling.budget = static_cast<int>(parse_int(key, value));
    } else if (key == "sampling.random_fraction") {
        cfg.sampling.random_fraction = parse_real(key, value);
    } else if (key == "sampling.weight_floor") {
        cfg.sampling.weight_floor = parse_real(key, value);
    } else if (key == "shift.pairs") {
        cfg.shift.swap_pairs = parse_pairs(key, value);
    } else if (key == "shift.start_cycle") {
        cfg.shift.start_cycle = static_cast<int>(parse_int(key, value));
    } else if (key == "train.epochs") {
        cfg.train.epochs = static_cast<int>(parse_int(key, value));
    } else if (key == "train.batch_size") {
        cfg.train.batch_size = static_cast<int>(parse_int(key, value));
    } else if (key == "train.learning_rate") {
        cfg.train.learning_rate = parse_real(key, value);
    } else if (key == "train.momentum") {
        cfg.train.momentum = parse_real(key, value);
    } else if (key == "execution.mode") {
        if (value == "serial") {
            cfg.exec = ExecPolicy::serial;
        } else if (value == "parallel") {
            cfg.exec = ExecPolicy::parallel;
        } else {
            throw ConfigError("execution.mode must be serial or parallel, got '" + value + "'");
        }
    } else if (key == "master_seed") {
        cfg.master_seed = parse_u64(key, value);
    } else if (key == "output.dir") {
        cfg.output_dir = value;
    } else if (key == "report.truth_remap") {
        cfg.report_truth_remap = parse_pairs(key, value);
    } else {
        throw ConfigError("unknown key: " + key);
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "dataset.kind = "
        << (c.dataset.kind == DatasetKind::mnist ? "mnist" : "synthetic") << "\n";
    out << "dataset.mnist_images = " << c.dataset.mnist_images << "\n";
    out << "dataset.mnist_labels = " << c.dataset.mnist_labels << "\n";
    out << "dataset.synthetic_size = " << c.dataset.synthetic_size << "\n";
    out << "dataset.synthetic_seed = " << c.dataset.synthetic_seed << "\n";
    out << "dataset.glyph_jitter = " << real_to_string(c.dataset.glyph.jitter) << "\n";
    out << "dataset.glyph_noise = " << real_to_string(c.dataset.glyph.noise) << "\n";
    out << "cycles = " << c.cycles << "\n";
    out << "repetitions = " << c.repetitions << "\n";
    out << "splits.train_size = " << c.train_size << "\n";
    out << "splits.verification_size = " << c.verification_size << "\n";
    out << "batch.size = " << c.batch_size << "\n";
    out << "oracle.mode = " << (c.oracle_mode == OracleMode::dnn_os ? "dnn_os" : "baseline")
        << "\n";
    out << "trigger.divergence_threshold = " << real_to_string(c.trigger.divergence_threshold)
        << "\n";
    out << "trigger.minimum_accuracy = " << real_to_string(c.trigger.minimum_accuracy) << "\n";
    out << "retrain.mode = "
        << (c.retrain.mode == RetrainMode::append ? "append" : "replace_after_k") << "\n";
    out << "retrain.k = " << c.retrain.k << "\n";
    out << "retrain.new_label_split = " << real_to_string(c.retrain.new_label_split) << "\n";
    out << "sampling.budget = " << c.sampling.budget << "\n";
    out << "sampling.random_fraction = " << real_to_string(c.sampling.random_fraction) << "\n";
    out << "sampling.weight_floor = " << real_to_string(c.sampling.weight_floor) << "\n";
    out << "shift.pairs = " << pairs_to_string(c.shift.swap_pairs) << "\n";
    out << "shift.start_cycle = " << c.shift.start_cycle << "\n";
    out << "train.epochs = " << c.train.epochs << "\n";
    out << "train.batch_size = " << c.train.batch_size << "\n";
    out << "train.learning_rate = " << real_to_string(c.train.learning_rate) << "\n";
    out << "train.momentum = " << real_to_string(c.train.momentum) << "\n";
    out << "execution.mode = " << (c.exec == ExecPolicy::serial ? "serial" : "parallel") << "\n";
    out << "master_seed = " << c.master_seed << "\n";
    out << "output.dir = " << c.output_dir << "\n";
    out << "report.truth_remap = " << pairs_to_string(c.report_truth_remap) << "\n";
    return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    const std::string text = serialize_config(config);
    return fnv1a64(text.data(), text.size());
}

}  // namespace daic
