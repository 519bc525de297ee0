// Compares the serial reference kernels against the OpenMP variants on
// workload shapes matching the experiment (1000-example batches, 784-128-10
// network, 100-tree forest), and checks that both produce identical bytes.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <vector>

#include "daic/dataset.hpp"
#include "daic/glyphs.hpp"
#include "daic/kernels.hpp"
#include "daic/model.hpp"
#include "daic/oracle.hpp"

using namespace daic;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-24s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
}

std::vector<double> random_matrix(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> m(n);
    for (double& v : m) {
        v = unit(rng);
    }
    return m;
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", kernels::max_threads());

    const int n = 1000;
    const int din = 784;
    const int hid = 128;
    const int dout = 10;

    const std::vector<double> x = random_matrix(std::size_t(n) * din, 1);
    const std::vector<double> w1 = random_matrix(std::size_t(din) * hid, 2);
    const std::vector<double> b1 = random_matrix(hid, 3);
    std::vector<double> ys(std::size_t(n) * hid);
    std::vector<double> yp(std::size_t(n) * hid);

    {
        const double ts = time_ms(
            [&] { kernels::dense_forward_serial(x.data(), n, din, w1.data(), b1.data(), hid,
                                                ys.data()); },
            5);
        const double tp = time_ms(
            [&] { kernels::dense_forward(x.data(), n, din, w1.data(), b1.data(), hid, yp.data(),
                                         ExecPolicy::parallel); },
            5);
        report("dense_forward 1000x784", ts, tp,
               std::memcmp(ys.data(), yp.data(), ys.size() * sizeof(double)) == 0);
    }

    {
        const std::vector<double> d = random_matrix(std::size_t(n) * hid, 4);
        std::vector<double> gs(std::size_t(din) * hid);
        std::vector<double> gp(std::size_t(din) * hid);
        const double ts = time_ms(
            [&] { kernels::matmul_at_b_serial(x.data(), d.data(), n, din, hid, gs.data()); }, 5);
        const double tp = time_ms(
            [&] { kernels::matmul_at_b(x.data(), d.data(), n, din, hid, gp.data(),
                                       ExecPolicy::parallel); },
            5);
        report("grad contraction", ts, tp,
               std::memcmp(gs.data(), gp.data(), gs.size() * sizeof(double)) == 0);
    }

    // End-to-end surfaces: batch prediction and forest training on glyph data.
    const LabeledSet corpus = glyph_generate(1500, 99);
    LabeledSet train_set{std::vector<Example>(corpus.examples.begin(),
                                              corpus.examples.begin() + 1000),
                         SetRole::train};
    LabeledSet verif_set{std::vector<Example>(corpus.examples.begin() + 1000,
                                              corpus.examples.end()),
                         SetRole::verification};

    TrainConfig tc;
    tc.epochs = 3;
    tc.seed = 7;
    const NetworkParams params = train(train_set, tc, nullptr, ExecPolicy::parallel);

    {
        std::vector<Prediction> ps;
        std::vector<Prediction> pp;
        const double ts =
            time_ms([&] { ps = predict_batch(params, train_set.examples, ExecPolicy::serial); }, 3);
        const double tp = time_ms(
            [&] { pp = predict_batch(params, train_set.examples, ExecPolicy::parallel); }, 3);
        bool same = ps.size() == pp.size();
        for (std::size_t i = 0; same && i < ps.size(); ++i) {
            same = ps[i].label == pp[i].label &&
                   std::memcmp(ps[i].last_layer.data(), pp[i].last_layer.data(),
                               sizeof(ps[i].last_layer)) == 0;
        }
        report("predict_batch 1000", ts, tp, same);
    }

    {
        FailureForest fs;
        FailureForest fp;
        const double ts = time_ms(
            [&] { fs = train_failure_forest(verif_set, params, 42, {}, ExecPolicy::serial); }, 3);
        const double tp = time_ms(
            [&] { fp = train_failure_forest(verif_set, params, 42, {}, ExecPolicy::parallel); },
            3);
        const std::vector<Prediction> probe = predict_batch(params, verif_set.examples);
        bool same = true;
        for (const Prediction& pr : probe) {
            same = same && fs.fail_votes(pr.last_layer) == fp.fail_votes(pr.last_layer);
        }
        report("failure forest 100 trees", ts, tp, same);
    }

    {
        LabeledSet big{corpus.examples, SetRole::train};
        TrainConfig one_epoch;
        one_epoch.epochs = 1;
        one_epoch.seed = 21;
        NetworkParams ms;
        NetworkParams mp;
        const double ts =
            time_ms([&] { ms = train(big, one_epoch, nullptr, ExecPolicy::serial); }, 2);
        const double tp =
            time_ms([&] { mp = train(big, one_epoch, nullptr, ExecPolicy::parallel); }, 2);
        report("train epoch 1500x784", ts, tp, ms.identity == mp.identity);
    }

    return 0;
}
