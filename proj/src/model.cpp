#include "daic/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "daic/common.hpp"

namespace daic {

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("train.epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw ConfigError("train.batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("train.learning_rate must be > 0");
    }
    if (momentum < 0.0 || momentum >= 1.0) {
        throw ConfigError("train.momentum must be in [0, 1)");
    }
}

void NetworkParams::refresh_identity() {
    std::uint64_t h = fnv1a64(&input_dim, sizeof(input_dim));
    h = fnv1a64(&hidden_dim, sizeof(hidden_dim), h);
    h = fnv1a64(&output_dim, sizeof(output_dim), h);
    h = fnv1a64(w1.data(), w1.size() * sizeof(double), h);
    h = fnv1a64(b1.data(), b1.size() * sizeof(double), h);
    h = fnv1a64(w2.data(), w2.size() * sizeof(double), h);
    h = fnv1a64(b2.data(), b2.size() * sizeof(double), h);
    identity = h;
}

NetworkParams init_params(int input_dim, std::uint64_t seed) {
    if (input_dim < 1) {
        throw ParameterError("init_params: input_dim must be >= 1");
    }
    NetworkParams p;
    p.input_dim = input_dim;
    p.init_seed = seed;
    p.w1.resize(std::size_t(input_dim) * p.hidden_dim);
    p.b1.assign(p.hidden_dim, 0.0);
    p.w2.resize(std::size_t(p.hidden_dim) * p.output_dim);
    p.b2.assign(p.output_dim, 0.0);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double s1 = 1.0 / std::sqrt(double(input_dim));
    for (double& w : p.w1) {
        w = unit(rng) * s1;
    }
    const double s2 = 1.0 / std::sqrt(double(p.hidden_dim));
    for (double& w : p.w2) {
        w = unit(rng) * s2;
    }
    p.refresh_identity();
    return p;
}

namespace {

struct FlatBatch {
    std::vector<double> x;  // n x input_dim
    std::vector<int> y;     // n
    int n = 0;
};

FlatBatch flatten(std::span<const Example> batch, int input_dim) {
    FlatBatch fb;
    fb.n = static_cast<int>(batch.size());
    fb.x.resize(std::size_t(fb.n) * input_dim);
    fb.y.resize(fb.n);
    for (int i = 0; i < fb.n; ++i) {
        if (static_cast<int>(batch[i].pixels.size()) != input_dim) {
            throw ParameterError("input dimension mismatch: expected " +
                                 std::to_string(input_dim) + ", got " +
                                 std::to_string(batch[i].pixels.size()));
        }
        std::copy(batch[i].pixels.begin(), batch[i].pixels.end(),
                  fb.x.begin() + std::size_t(i) * input_dim);
        fb.y[i] = batch[i].true_label;
    }
    return fb;
}

// Forward pass into preallocated buffers; prob ends up row-softmaxed.
void forward(const NetworkParams& p, const double* x, int n, double* hidden, double* prob,
             ExecPolicy policy) {
    kernels::dense_forward(x, n, p.input_dim, p.w1.data(), p.b1.data(), p.hidden_dim, hidden,
                           policy);
    kernels::relu_inplace(hidden, std::size_t(n) * p.hidden_dim, policy);
    kernels::dense_forward(hidden, n, p.hidden_dim, p.w2.data(), p.b2.data(), p.output_dim,
                           prob, policy);
    kernels::softmax_rows(prob, n, p.output_dim, policy);
}

double nll(const double* prob, const int* y, int n, int out_dim) {
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        // A true-class probability that underflows to zero sends the loss to
        // infinity, which the training loop reports as divergence.
        loss -= std::log(prob[std::size_t(i) * out_dim + y[i]]);
    }
    return loss / n;
}

}  // namespace

double loss_and_gradients(const NetworkParams& params, std::span<const Example> batch,
                          Gradients& grads, ExecPolicy policy) {
    if (batch.empty()) {
        throw ParameterError("loss_and_gradients: empty batch");
    }
    for (const Example& ex : batch) {
        if (!ex.labeled()) {
            throw ParameterError("loss_and_gradients: unlabeled example");
        }
    }
    const FlatBatch fb = flatten(batch, params.input_dim);
    const int n = fb.n;
    const int hid = params.hidden_dim;
    const int out = params.output_dim;

    std::vector<double> hidden(std::size_t(n) * hid);
    std::vector<double> prob(std::size_t(n) * out);
    forward(params, fb.x.data(), n, hidden.data(), prob.data(), policy);
    const double loss = nll(prob.data(), fb.y.data(), n, out);

    // dL/dlogits = (prob - onehot) / n
    std::vector<double> d2 = prob;
    for (int i = 0; i < n; ++i) {
        d2[std::size_t(i) * out + fb.y[i]] -= 1.0;
    }
    for (double& v : d2) {
        v /= n;
    }

    grads.w2.resize(params.w2.size());
    grads.b2.resize(params.b2.size());
    grads.w1.resize(params.w1.size());
    grads.b1.resize(params.b1.size());

    kernels::matmul_at_b(hidden.data(), d2.data(), n, hid, out, grads.w2.data(), policy);
    kernels::colsum(d2.data(), n, out, grads.b2.data(), policy);

    std::vector<double> d1(std::size_t(n) * hid);
    kernels::backprop_relu(d2.data(), params.w2.data(), hidden.data(), n, hid, out, d1.data(),
                           policy);
    kernels::matmul_at_b(fb.x.data(), d1.data(), n, params.input_dim, hid, grads.w1.data(),
                         policy);
    kernels::colsum(d1.data(), n, hid, grads.b1.data(), policy);
    return loss;
}

double cross_entropy_loss(const NetworkParams& params, std::span<const Example> batch,
                          ExecPolicy policy) {
    if (batch.empty()) {
        throw ParameterError("cross_entropy_loss: empty batch");
    }
    const FlatBatch fb = flatten(batch, params.input_dim);
    std::vector<double> hidden(std::size_t(fb.n) * params.hidden_dim);
    std::vector<double> prob(std::size_t(fb.n) * params.output_dim);
    forward(params, fb.x.data(), fb.n, hidden.data(), prob.data(), policy);
    return nll(prob.data(), fb.y.data(), fb.n, params.output_dim);
}

NetworkParams train(const LabeledSet& data, const TrainConfig& cfg, const NetworkParams* init,
                    ExecPolicy policy, std::vector<double>* epoch_losses) {
    cfg.validate();
    if (data.empty()) {
        throw ParameterError("train: empty dataset");
    }
    for (const Example& ex : data.examples) {
        if (!ex.labeled()) {
            throw ParameterError("train: dataset contains unlabeled examples");
        }
    }
    const int input_dim = static_cast<int>(data.examples.front().pixels.size());

    NetworkParams params;
    if (init != nullptr) {
        if (init->input_dim != input_dim) {
            throw ParameterError("train: init architecture does not match data");
        }
        params = *init;
    } else {
        params = init_params(input_dim, derive_seed(cfg.seed, 0x171));
    }

    Gradients grads;
    Gradients velocity;
    velocity.w1.assign(params.w1.size(), 0.0);
    velocity.b1.assign(params.b1.size(), 0.0);
    velocity.w2.assign(params.w2.size(), 0.0);
    velocity.b2.assign(params.b2.size(), 0.0);

    const int n = static_cast<int>(data.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 0x0d9));

    std::vector<Example> batch;
    batch.reserve(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int n_batches = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int stop = std::min(start + cfg.batch_size, n);
            batch.clear();
            for (int i = start; i < stop; ++i) {
                batch.push_back(data.examples[order[i]]);
            }
            const double loss = loss_and_gradients(params, batch, grads, policy);
            if (!std::isfinite(loss)) {
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1));
            }
            epoch_loss += loss;
            ++n_batches;

            kernels::sgd_momentum_step(params.w1.data(), velocity.w1.data(), grads.w1.data(),
                                       params.w1.size(), cfg.learning_rate, cfg.momentum, policy);
            kernels::sgd_momentum_step(params.b1.data(), velocity.b1.data(), grads.b1.data(),
                                       params.b1.size(), cfg.learning_rate, cfg.momentum, policy);
            kernels::sgd_momentum_step(params.w2.data(), velocity.w2.data(), grads.w2.data(),
                                       params.w2.size(), cfg.learning_rate, cfg.momentum, policy);
            kernels::sgd_momentum_step(params.b2.data(), velocity.b2.data(), grads.b2.data(),
                                       params.b2.size(), cfg.learning_rate, cfg.momentum, policy);
        }
        if (epoch_losses != nullptr) {
            epoch_losses->push_back(epoch_loss / n_batches);
        }
    }
    params.refresh_identity();
    return params;
}

Prediction predict(const NetworkParams& params, const Example& x) {
    if (static_cast<int>(x.pixels.size()) != params.input_dim) {
        throw ParameterError("predict: input dimension mismatch");
    }
    std::vector<double> hidden(params.hidden_dim);
    std::vector<double> prob(params.output_dim);
    forward(params, x.pixels.data(), 1, hidden.data(), prob.data(), ExecPolicy::serial);

    Prediction pred;
    for (int j = 0; j < params.output_dim; ++j) {
        pred.last_layer[j] = prob[j];
        if (prob[j] > pred.confidence) {
            pred.confidence = prob[j];
            pred.label = j;
        }
    }
    return pred;
}

std::vector<Prediction> predict_batch(const NetworkParams& params, std::span<const Example> batch,
                                      ExecPolicy policy) {
    std::vector<Prediction> preds(batch.size());
    if (policy == ExecPolicy::serial) {
        for (std::size_t i = 0; i < batch.size(); ++i) {
            preds[i] = predict(params, batch[i]);
        }
        return preds;
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(batch.size()); ++i) {
        preds[i] = predict(params, batch[i]);
    }
    return preds;
}

double accuracy(const NetworkParams& params, const LabeledSet& data, ExecPolicy policy) {
    if (data.empty()) {
        throw ParameterError("accuracy: empty dataset");
    }
    const std::vector<Prediction> preds = predict_batch(params, data.examples, policy);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!data.examples[i].labeled()) {
            throw ParameterError("accuracy: unlabeled example");
        }
        if (preds[i].label == data.examples[i].true_label) {
            ++correct;
        }
    }
    return double(correct) / double(preds.size());
}

namespace {

constexpr std::int32_t kParamsVersion = 1;

void write_i32(std::ostream& out, std::int32_t v) {
    unsigned char b[4] = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::int32_t read_i32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) {
        throw IoError("truncated params header in " + path);
    }
    return std::int32_t(b[0]) | (std::int32_t(b[1]) << 8) | (std::int32_t(b[2]) << 16) |
           (std::int32_t(b[3]) << 24);
}

void write_f64s(std::ostream& out, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) {
            b[i] = static_cast<unsigned char>(bits >> (8 * i));
        }
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_f64s(std::istream& in, std::vector<double>& v, const std::string& path) {
    for (double& d : v) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        if (!in) {
            throw IoError("truncated params data in " + path);
        }
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= std::uint64_t(b[i]) << (8 * i);
        }
        std::memcpy(&d, &bits, 8);
    }
}

}  // namespace

void save_params(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write params file: " + path);
    }
    write_i32(out, kParamsVersion);
    write_i32(out, params.input_dim);
    write_i32(out, params.hidden_dim);
    write_i32(out, params.output_dim);
    write_f64s(out, params.w1);
    write_f64s(out, params.b1);
    write_f64s(out, params.w2);
    write_f64s(out, params.b2);
    if (!out) {
        throw IoError("short write to params file: " + path);
    }
}

NetworkParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open params file: " + path);
    }
    const std::int32_t version = read_i32(in, path);
    if (version != kParamsVersion) {
        throw FormatError("unsupported params version in " + path);
    }
    NetworkParams p;
    p.input_dim = read_i32(in, path);
    p.hidden_dim = read_i32(in, path);
    p.output_dim = read_i32(in, path);
    if (p.input_dim < 1 || p.hidden_dim < 1 || p.output_dim < 1 ||
        p.output_dim > kNumClasses) {
        throw FormatError("implausible architecture header in " + path);
    }
    p.w1.resize(std::size_t(p.input_dim) * p.hidden_dim);
    p.b1.resize(p.hidden_dim);
    p.w2.resize(std::size_t(p.hidden_dim) * p.output_dim);
    p.b2.resize(p.output_dim);
    read_f64s(in, p.w1, path);
    read_f64s(in, p.b1, path);
    read_f64s(in, p.w2, path);
    read_f64s(in, p.b2, path);
    p.refresh_identity();
    return p;
}

}  // namespace daic
