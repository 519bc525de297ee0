#include "daic/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace daic::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

inline void dense_forward_row(const double* xi, int in_dim, const double* w,
                              const double* b, int out_dim, double* yi) {
    for (int j = 0; j < out_dim; ++j) {
        yi[j] = b[j];
    }
    for (int k = 0; k < in_dim; ++k) {
        const double xv = xi[k];
        if (xv == 0.0) {
            continue;
        }
        const double* wr = w + static_cast<std::size_t>(k) * out_dim;
        for (int j = 0; j < out_dim; ++j) {
            yi[j] += xv * wr[j];
        }
    }
}

inline void softmax_row(double* yi, int dim) {
    double m = yi[0];
    for (int j = 1; j < dim; ++j) {
        m = std::max(m, yi[j]);
    }
    double sum = 0.0;
    for (int j = 0; j < dim; ++j) {
        yi[j] = std::exp(yi[j] - m);
        sum += yi[j];
    }
    for (int j = 0; j < dim; ++j) {
        yi[j] /= sum;
    }
}

inline void matmul_at_b_row(const double* a, const double* d, int n, int p, int q,
                            int row, double* out) {
    double* o = out + static_cast<std::size_t>(row) * q;
    for (int j = 0; j < q; ++j) {
        o[j] = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        const double av = a[static_cast<std::size_t>(i) * p + row];
        if (av == 0.0) {
            continue;
        }
        const double* di = d + static_cast<std::size_t>(i) * q;
        for (int j = 0; j < q; ++j) {
            o[j] += av * di[j];
        }
    }
}

inline void backprop_relu_row(const double* d2, const double* w2, const double* h,
                              int hid, int out_dim, int i, double* d1) {
    const double* d2i = d2 + static_cast<std::size_t>(i) * out_dim;
    const double* hi = h + static_cast<std::size_t>(i) * hid;
    double* d1i = d1 + static_cast<std::size_t>(i) * hid;
    for (int k = 0; k < hid; ++k) {
        if (hi[k] <= 0.0) {
            d1i[k] = 0.0;
            continue;
        }
        const double* w2r = w2 + static_cast<std::size_t>(k) * out_dim;
        double acc = 0.0;
        for (int j = 0; j < out_dim; ++j) {
            acc += d2i[j] * w2r[j];
        }
        d1i[k] = acc;
    }
}

}  // namespace

void dense_forward_serial(const double* x, int n, int in_dim,
                          const double* w, const double* b, int out_dim, double* y) {
    for (int i = 0; i < n; ++i) {
        dense_forward_row(x + static_cast<std::size_t>(i) * in_dim, in_dim, w, b, out_dim,
                          y + static_cast<std::size_t>(i) * out_dim);
    }
}

void dense_forward(const double* x, int n, int in_dim,
                   const double* w, const double* b, int out_dim, double* y,
                   ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        dense_forward_serial(x, n, in_dim, w, b, out_dim, y);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        dense_forward_row(x + static_cast<std::size_t>(i) * in_dim, in_dim, w, b, out_dim,
                          y + static_cast<std::size_t>(i) * out_dim);
    }
}

void relu_inplace_serial(double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = y[i] > 0.0 ? y[i] : 0.0;
    }
}

void relu_inplace(double* y, std::size_t n, ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        relu_inplace_serial(y, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        y[i] = y[i] > 0.0 ? y[i] : 0.0;
    }
}

void softmax_rows_serial(double* y, int n, int dim) {
    for (int i = 0; i < n; ++i) {
        softmax_row(y + static_cast<std::size_t>(i) * dim, dim);
    }
}

void softmax_rows(double* y, int n, int dim, ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        softmax_rows_serial(y, n, dim);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        softmax_row(y + static_cast<std::size_t>(i) * dim, dim);
    }
}

void matmul_at_b_serial(const double* a, const double* d, int n, int p, int q, double* out) {
    for (int row = 0; row < p; ++row) {
        matmul_at_b_row(a, d, n, p, q, row, out);
    }
}

void matmul_at_b(const double* a, const double* d, int n, int p, int q, double* out,
                 ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        matmul_at_b_serial(a, d, n, p, q, out);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int row = 0; row < p; ++row) {
        matmul_at_b_row(a, d, n, p, q, row, out);
    }
}

void colsum_serial(const double* m, int n, int dim, double* out) {
    for (int j = 0; j < dim; ++j) {
        out[j] = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        const double* mi = m + static_cast<std::size_t>(i) * dim;
        for (int j = 0; j < dim; ++j) {
            out[j] += mi[j];
        }
    }
}

void colsum(const double* m, int n, int dim, double* out, ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        colsum_serial(m, n, dim, out);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < dim; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += m[static_cast<std::size_t>(i) * dim + j];
        }
        out[j] = acc;
    }
}

void backprop_relu_serial(const double* d2, const double* w2, const double* h,
                          int n, int hid, int out_dim, double* d1) {
    for (int i = 0; i < n; ++i) {
        backprop_relu_row(d2, w2, h, hid, out_dim, i, d1);
    }
}

void backprop_relu(const double* d2, const double* w2, const double* h,
                   int n, int hid, int out_dim, double* d1, ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        backprop_relu_serial(d2, w2, h, n, hid, out_dim, d1);
        return;
    }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        backprop_relu_row(d2, w2, h, hid, out_dim, i, d1);
    }
}

void sgd_momentum_step_serial(double* w, double* v, const double* g,
                              std::size_t n, double lr, double momentum) {
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        w[i] += v[i];
    }
}

void sgd_momentum_step(double* w, double* v, const double* g,
                       std::size_t n, double lr, double momentum, ExecPolicy policy) {
    if (policy == ExecPolicy::serial) {
        sgd_momentum_step_serial(w, v, g, n, lr, momentum);
        return;
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        v[i] = momentum * v[i] - lr * g[i];
        w[i] += v[i];
    }
}

}  // namespace daic::kernels
