// Scalar reference kernels. These define the semantics the AVX2 variants are
// tested against; keep them free of manual unrolling so the arithmetic order
// stays obvious.

#include <cmath>
#include <limits>

#include "cadseq/kernels.hpp"

namespace cadseq::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double min_sqdist3_scalar(double qx, double qy, double qz, const double* xs, const double* ys,
                          const double* zs, std::size_t n) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        const double dz = qz - zs[i];
        const double d = (dx * dx + dy * dy) + dz * dz;
        if (d < best) best = d;
    }
    return best;
}

void gemm_nn_scalar(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                    std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = crow[j];
            const double* arow = a + i * k;
            for (std::size_t kk = 0; kk < k; ++kk) acc += arow[kk] * b[kk * n + j];
            crow[j] = acc;
        }
    }
}

void adam_update_scalar(double* p, const double* g, double* m, double* v, std::size_t n, double lr,
                        double beta1, double beta2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

}  // namespace

namespace detail {

const KernelTable scalar_table = {
    dot_scalar, axpy_scalar, sum_squares_scalar, min_sqdist3_scalar, gemm_nn_scalar,
    adam_update_scalar,
};

}  // namespace detail
}  // namespace cadseq::kernels
