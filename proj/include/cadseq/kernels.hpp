#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the training stack and the point-cloud
// metrics. Every kernel has a scalar reference implementation and an AVX2
// variant; the active backend is selected once at runtime from CPU features
// and can be overridden for equivalence testing.
//
// Exactness contract:
//   - min_sqdist3 and adam_update are elementwise-identical across backends
//     (no reassociation, no FMA on the distance path).
//   - dot, axpy, sum_squares and gemm_nn reassociate/fuse in the vector path
//     and agree with the scalar reference to relative 1e-12 on well-scaled
//     data.
namespace cadseq::kernels {

enum class Backend {
    Auto,    // pick at runtime from CPU features
    Scalar,
    Avx2,
};

void set_backend(Backend b);   // Backend::Avx2 on a CPU without AVX2 falls back to Scalar
Backend active_backend();      // the resolved backend (never Auto)
bool cpu_has_avx2();

double dot(const double* a, const double* b, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

double sum_squares(const double* a, std::size_t n);

// min over i of (qx-xs[i])^2 + (qy-ys[i])^2 + (qz-zs[i])^2
double min_sqdist3(double qx, double qy, double qz,
                   const double* xs, const double* ys, const double* zs, std::size_t n);

// C[m x n] += A[m x k] * B[k x n], all row-major, C pre-initialized by caller
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t n, std::size_t k);

// Adam with bias correction folded into bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t):
//   m = beta1*m + (1-beta1)*g;  v = beta2*v + (1-beta2)*g^2
//   p -= lr * (m*bc1) / (sqrt(v*bc2) + eps)
void adam_update(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double beta1, double beta2, double eps, double bc1, double bc2);

namespace detail {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*sum_squares)(const double*, std::size_t);
    double (*min_sqdist3)(double, double, double, const double*, const double*, const double*,
                          std::size_t);
    void (*gemm_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*adam_update)(double*, const double*, double*, double*, std::size_t, double, double,
                        double, double, double, double);
};

extern const KernelTable scalar_table;
extern const KernelTable avx2_table;

}  // namespace detail

}  // namespace cadseq::kernels
