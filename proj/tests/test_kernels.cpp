#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "daic/kernels.hpp"

using namespace daic;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) {
        x = unit(rng);
    }
    return v;
}

bool same_bytes(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("dense_forward matches a naive reference and its parallel variant bit-exactly") {
    const int n = 37;
    const int din = 19;
    const int dout = 11;
    const auto x = random_vec(std::size_t(n) * din, 1);
    const auto w = random_vec(std::size_t(din) * dout, 2);
    const auto b = random_vec(dout, 3);

    std::vector<double> naive(std::size_t(n) * dout);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < dout; ++j) {
            double acc = b[j];
            for (int k = 0; k < din; ++k) {
                acc += x[std::size_t(i) * din + k] * w[std::size_t(k) * dout + j];
            }
            naive[std::size_t(i) * dout + j] = acc;
        }
    }

    std::vector<double> serial(naive.size());
    std::vector<double> parallel(naive.size());
    kernels::dense_forward_serial(x.data(), n, din, w.data(), b.data(), dout, serial.data());
    kernels::dense_forward(x.data(), n, din, w.data(), b.data(), dout, parallel.data(),
                           ExecPolicy::parallel);

    for (std::size_t i = 0; i < naive.size(); ++i) {
        CHECK(serial[i] == doctest::Approx(naive[i]).epsilon(1e-12));
    }
    CHECK(same_bytes(serial, parallel));
}

TEST_CASE("all parallel kernels are bit-identical to the serial reference") {
    const int n = 64;
    const int p = 33;
    const int q = 17;
    const auto a = random_vec(std::size_t(n) * p, 4);
    const auto d = random_vec(std::size_t(n) * q, 5);

    SUBCASE("matmul_at_b") {
        std::vector<double> s(std::size_t(p) * q);
        std::vector<double> par(std::size_t(p) * q);
        kernels::matmul_at_b_serial(a.data(), d.data(), n, p, q, s.data());
        kernels::matmul_at_b(a.data(), d.data(), n, p, q, par.data(), ExecPolicy::parallel);
        CHECK(same_bytes(s, par));
    }

    SUBCASE("colsum") {
        std::vector<double> s(q);
        std::vector<double> par(q);
        kernels::colsum_serial(d.data(), n, q, s.data());
        kernels::colsum(d.data(), n, q, par.data(), ExecPolicy::parallel);
        CHECK(same_bytes(s, par));
    }

    SUBCASE("relu") {
        auto s = a;
        auto par = a;
        kernels::relu_inplace_serial(s.data(), s.size());
        kernels::relu_inplace(par.data(), par.size(), ExecPolicy::parallel);
        CHECK(same_bytes(s, par));
        for (double v : s) {
            CHECK(v >= 0.0);
        }
    }

    SUBCASE("softmax_rows") {
        auto s = d;
        auto par = d;
        kernels::softmax_rows_serial(s.data(), n, q);
        kernels::softmax_rows(par.data(), n, q, ExecPolicy::parallel);
        CHECK(same_bytes(s, par));
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < q; ++j) {
                row += s[std::size_t(i) * q + j];
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    SUBCASE("backprop_relu") {
        const auto h = random_vec(std::size_t(n) * p, 6);
        const auto w2 = random_vec(std::size_t(p) * q, 7);
        std::vector<double> s(std::size_t(n) * p);
        std::vector<double> par(std::size_t(n) * p);
        kernels::backprop_relu_serial(d.data(), w2.data(), h.data(), n, p, q, s.data());
        kernels::backprop_relu(d.data(), w2.data(), h.data(), n, p, q, par.data(),
                               ExecPolicy::parallel);
        CHECK(same_bytes(s, par));
    }

    SUBCASE("sgd step") {
        auto ws = a;
        auto wp = a;
        std::vector<double> vs(a.size(), 0.25);
        auto vp = vs;
        const auto g = random_vec(a.size(), 8);
        kernels::sgd_momentum_step_serial(ws.data(), vs.data(), g.data(), ws.size(), 0.01, 0.9);
        kernels::sgd_momentum_step(wp.data(), vp.data(), g.data(), wp.size(), 0.01, 0.9,
                                   ExecPolicy::parallel);
        CHECK(same_bytes(ws, wp));
        CHECK(same_bytes(vs, vp));
    }
}
