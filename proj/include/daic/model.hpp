#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "daic/dataset.hpp"
#include "daic/kernels.hpp"

namespace daic {

inline constexpr int kHiddenDim = 128;

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

// Weights of the input -> hidden(ReLU) -> 10(softmax) classifier. Row-major:
// w1[input][hidden], w2[hidden][output].
struct NetworkParams {
    int input_dim = 0;
    int hidden_dim = kHiddenDim;
    int output_dim = kNumClasses;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;
    std::uint64_t init_seed = 0;
    std::uint64_t identity = 0;  // value hash; oracle artifacts pin this

    std::size_t parameter_count() const {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
    void refresh_identity();
};

struct Prediction {
    int label = 0;
    double confidence = 0.0;
    std::array<double, kNumClasses> last_layer{};  // softmax outputs
};

// Flat parameter gradients, same layout as NetworkParams.
struct Gradients {
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;
};

NetworkParams init_params(int input_dim, std::uint64_t seed);

// Mean cross-entropy of the batch plus gradients; the training step and the
// finite-difference gradient check both go through here.
double loss_and_gradients(const NetworkParams& params, std::span<const Example> batch,
                          Gradients& grads, ExecPolicy policy = ExecPolicy::parallel);

double cross_entropy_loss(const NetworkParams& params, std::span<const Example> batch,
                          ExecPolicy policy = ExecPolicy::parallel);

// Mini-batch SGD with momentum. Starts from `init` when given (re-training),
// otherwise from a fresh fan-in-scaled initialization. Deterministic given
// cfg.seed. Appends the mean loss of each epoch to *epoch_losses when set.
NetworkParams train(const LabeledSet& data, const TrainConfig& cfg,
                    const NetworkParams* init = nullptr,
                    ExecPolicy policy = ExecPolicy::parallel,
                    std::vector<double>* epoch_losses = nullptr);

Prediction predict(const NetworkParams& params, const Example& x);

std::vector<Prediction> predict_batch(const NetworkParams& params,
                                      std::span<const Example> batch,
                                      ExecPolicy policy = ExecPolicy::parallel);

double accuracy(const NetworkParams& params, const LabeledSet& data,
                ExecPolicy policy = ExecPolicy::parallel);

// Flat little-endian binary of 64-bit reals behind a 4-int32 header
// (version, input_dim, hidden_dim, output_dim).
void save_params(const NetworkParams& params, const std::string& path);
NetworkParams load_params(const std::string& path);

}  // namespace daic
