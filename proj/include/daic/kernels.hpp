#pragma once

#include <cstddef>

// Dense compute kernels used by the model and oracle hot paths.
//
// Every kernel comes in two variants: a serial reference implementation
// (suffix `_serial`) and an OpenMP one. Parallel loops only ever assign
// disjoint output slots and keep the reduction order inside each slot
// identical to the serial reference, so both variants produce bit-identical
// results for any thread count. Tests compare them with memcmp; the bench
// tool compares their wall time.

namespace daic {

enum class ExecPolicy {
    serial,
    parallel,
};

namespace kernels {

// y[n x out] = x[n x in] * w[in x out] + b[out]
void dense_forward_serial(const double* x, int n, int in_dim,
                          const double* w, const double* b, int out_dim, double* y);
void dense_forward(const double* x, int n, int in_dim,
                   const double* w, const double* b, int out_dim, double* y,
                   ExecPolicy policy);

void relu_inplace_serial(double* y, std::size_t n);
void relu_inplace(double* y, std::size_t n, ExecPolicy policy);

// Row-wise softmax with max subtraction.
void softmax_rows_serial(double* y, int n, int dim);
void softmax_rows(double* y, int n, int dim, ExecPolicy policy);

// out[p x q] = a[n x p]^T * d[n x q]; the gradient contraction. Parallel over
// rows of `out`, serial over n inside each slot.
void matmul_at_b_serial(const double* a, const double* d, int n, int p, int q, double* out);
void matmul_at_b(const double* a, const double* d, int n, int p, int q, double* out,
                 ExecPolicy policy);

// out[dim] = column sums of m[n x dim].
void colsum_serial(const double* m, int n, int dim, double* out);
void colsum(const double* m, int n, int dim, double* out, ExecPolicy policy);

// d1[n x hid] = (d2[n x out] * w2[hid x out]^T) masked by h > 0.
void backprop_relu_serial(const double* d2, const double* w2, const double* h,
                          int n, int hid, int out_dim, double* d1);
void backprop_relu(const double* d2, const double* w2, const double* h,
                   int n, int hid, int out_dim, double* d1, ExecPolicy policy);

// v = momentum * v - lr * g; w += v (elementwise).
void sgd_momentum_step_serial(double* w, double* v, const double* g,
                              std::size_t n, double lr, double momentum);
void sgd_momentum_step(double* w, double* v, const double* g,
                       std::size_t n, double lr, double momentum, ExecPolicy policy);

int max_threads();

}  // namespace kernels
}  // namespace daic
