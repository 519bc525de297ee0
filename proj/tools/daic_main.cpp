#include <chrono>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "daic/config.hpp"
#include "daic/dataset.hpp"
#include "daic/glyphs.hpp"
#include "daic/results.hpp"

namespace {

daic::LabeledSet load_corpus(const daic::ExperimentConfig& cfg) {
    if (cfg.dataset.kind == daic::DatasetKind::mnist) {
        return daic::load_idx(cfg.dataset.mnist_images, cfg.dataset.mnist_labels);
    }
    return daic::glyph_generate(cfg.dataset.synthetic_size, cfg.dataset.synthetic_seed,
                                cfg.dataset.glyph);
}

int run_command(const std::string& config_path, const std::vector<std::string>& overrides) {
    daic::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = daic::parse_config_file(config_path);
    }
    if (!overrides.empty()) {
        std::string text = daic::serialize_config(cfg);
        for (const std::string& kv : overrides) {
            if (kv.find('=') == std::string::npos) {
                throw daic::ConfigError("override must be key=value, got '" + kv + "'");
            }
            text += kv + "\n";
        }
        cfg = daic::parse_config_text(text);
    }
    cfg.validate();

    const daic::LabeledSet corpus = load_corpus(cfg);
    std::cout << "corpus: " << corpus.size() << " examples, "
              << (cfg.dataset.kind == daic::DatasetKind::mnist ? "mnist" : "synthetic")
              << "\n";

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<daic::CycleRecord> records = daic::run_experiment(cfg.to_plan(), corpus);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const daic::RunOutputs outputs =
        daic::emit_results(records, cfg, wall, cfg.output_dir);

    std::cout << daic::summary_to_csv(records);
    std::cout << "wall_seconds: " << wall << "\n";
    std::cout << "wrote " << outputs.records_csv << ", " << outputs.summary_csv << ", "
              << outputs.manifest_json << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DAIC: iterative assessment and improvement of classifier operational accuracy"};
    app.require_subcommand(1);

    // run
    std::string config_path;
    std::vector<std::string> overrides;
    int opt_cycles = -1;
    int opt_repetitions = -1;
    std::string opt_oracle;
    std::string opt_dataset;
    std::string opt_mnist_images;
    std::string opt_mnist_labels;
    std::string opt_out;
    std::string opt_exec;
    long long opt_seed = -1;

    CLI::App* run = app.add_subcommand("run", "run the assessment-and-improvement experiment");
    run->add_option("--config", config_path, "config file (flat key = value)");
    run->add_option("--cycles", opt_cycles, "number of cycles");
    run->add_option("--repetitions", opt_repetitions, "number of repetitions");
    run->add_option("--oracle", opt_oracle, "pseudo-oracle: dnn_os or baseline");
    run->add_option("--seed", opt_seed, "master seed");
    run->add_option("--out", opt_out, "output directory");
    run->add_option("--dataset", opt_dataset, "dataset kind: mnist or synthetic");
    run->add_option("--mnist-images", opt_mnist_images, "path to IDX image file");
    run->add_option("--mnist-labels", opt_mnist_labels, "path to IDX label file");
    run->add_option("--exec", opt_exec, "execution mode: parallel or serial");
    run->add_option("--set", overrides, "extra key=value overrides")->take_all();

    // gen-idx
    std::string gen_images = "digits-images-idx3-ubyte";
    std::string gen_labels = "digits-labels-idx1-ubyte";
    int gen_count = 10000;
    unsigned long long gen_seed = 20260801ull;
    double gen_jitter = daic::GlyphParams{}.jitter;
    double gen_noise = daic::GlyphParams{}.noise;

    CLI::App* gen = app.add_subcommand("gen-idx", "generate a synthetic digit corpus in IDX format");
    gen->add_option("--out-images", gen_images, "output IDX image path");
    gen->add_option("--out-labels", gen_labels, "output IDX label path");
    gen->add_option("--count", gen_count, "number of examples");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--jitter", gen_jitter, "stroke jitter");
    gen->add_option("--noise", gen_noise, "speckle noise amplitude");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            // Flags override file values.
            if (opt_cycles >= 0) {
                overrides.push_back("cycles = " + std::to_string(opt_cycles));
            }
            if (opt_repetitions >= 0) {
                overrides.push_back("repetitions = " + std::to_string(opt_repetitions));
            }
            if (!opt_oracle.empty()) {
                overrides.push_back("oracle.mode = " + opt_oracle);
            }
            if (opt_seed >= 0) {
                overrides.push_back("master_seed = " + std::to_string(opt_seed));
            }
            if (!opt_out.empty()) {
                overrides.push_back("output.dir = " + opt_out);
            }
            if (!opt_dataset.empty()) {
                overrides.push_back("dataset.kind = " + opt_dataset);
            }
            if (!opt_mnist_images.empty()) {
                overrides.push_back("dataset.mnist_images = " + opt_mnist_images);
            }
            if (!opt_mnist_labels.empty()) {
                overrides.push_back("dataset.mnist_labels = " + opt_mnist_labels);
            }
            if (!opt_exec.empty()) {
                overrides.push_back("execution.mode = " + opt_exec);
            }
            return run_command(config_path, overrides);
        }
        if (gen->parsed()) {
            const daic::LabeledSet set = daic::glyph_generate(
                gen_count, gen_seed, daic::GlyphParams{gen_jitter, gen_noise});
            daic::write_idx(set, gen_images, gen_labels);
            std::cout << "wrote " << set.size() << " examples to " << gen_images << " / "
                      << gen_labels << "\n";
            return 0;
        }
    } catch (const daic::DaicError& e) {
        std::cerr << "error (" << static_cast<int>(e.category()) << "): " << e.what() << "\n";
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
