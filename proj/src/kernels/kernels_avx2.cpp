// AVX2 variants. This translation unit is the only one compiled with
// -mavx2 -mfma; it must never be entered on a CPU without AVX2 (the
// dispatcher guards that).
//
// min_sqdist3 deliberately avoids FMA so every lane computes exactly the
// scalar expression; min-reduction is exact, which keeps the accelerated
// Chamfer path bit-identical to the brute-force reference.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "cadseq/kernels.hpp"

namespace cadseq::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_min_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

double min_sqdist3_avx2(double qx, double qy, double qz, const double* xs, const double* ys,
                        const double* zs, std::size_t n) {
    const __m256d qxv = _mm256_set1_pd(qx);
    const __m256d qyv = _mm256_set1_pd(qy);
    const __m256d qzv = _mm256_set1_pd(qz);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(qxv, _mm256_loadu_pd(xs + i));
        const __m256d dy = _mm256_sub_pd(qyv, _mm256_loadu_pd(ys + i));
        const __m256d dz = _mm256_sub_pd(qzv, _mm256_loadu_pd(zs + i));
        // mul/add only: must match the scalar expression bit for bit
        const __m256d d = _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)), _mm256_mul_pd(dz, dz));
        best = _mm256_min_pd(best, d);
    }
    double b = hmin(best);
    for (; i < n; ++i) {
        const double dx = qx - xs[i];
        const double dy = qy - ys[i];
        const double dz = qz - zs[i];
        const double d = (dx * dx + dy * dy) + dz * dz;
        if (d < b) b = d;
    }
    return b;
}

// 4-row x 8-column register-blocked microkernel; B rows stream once per
// 4-row block of A, C is touched once.
void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
                  std::size_t k) {
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
        const double* a0 = a + (i + 0) * k;
        const double* a1 = a + (i + 1) * k;
        const double* a2 = a + (i + 2) * k;
        const double* a3 = a + (i + 3) * k;
        std::size_t j = 0;
        for (; j + 8 <= n; j += 8) {
            __m256d c00 = _mm256_loadu_pd(c + (i + 0) * n + j);
            __m256d c01 = _mm256_loadu_pd(c + (i + 0) * n + j + 4);
            __m256d c10 = _mm256_loadu_pd(c + (i + 1) * n + j);
            __m256d c11 = _mm256_loadu_pd(c + (i + 1) * n + j + 4);
            __m256d c20 = _mm256_loadu_pd(c + (i + 2) * n + j);
            __m256d c21 = _mm256_loadu_pd(c + (i + 2) * n + j + 4);
            __m256d c30 = _mm256_loadu_pd(c + (i + 3) * n + j);
            __m256d c31 = _mm256_loadu_pd(c + (i + 3) * n + j + 4);
            for (std::size_t kk = 0; kk < k; ++kk) {
                const __m256d b0 = _mm256_loadu_pd(b + kk * n + j);
                const __m256d b1 = _mm256_loadu_pd(b + kk * n + j + 4);
                const __m256d av0 = _mm256_set1_pd(a0[kk]);
                const __m256d av1 = _mm256_set1_pd(a1[kk]);
                const __m256d av2 = _mm256_set1_pd(a2[kk]);
                const __m256d av3 = _mm256_set1_pd(a3[kk]);
                c00 = _mm256_fmadd_pd(av0, b0, c00);
                c01 = _mm256_fmadd_pd(av0, b1, c01);
                c10 = _mm256_fmadd_pd(av1, b0, c10);
                c11 = _mm256_fmadd_pd(av1, b1, c11);
                c20 = _mm256_fmadd_pd(av2, b0, c20);
                c21 = _mm256_fmadd_pd(av2, b1, c21);
                c30 = _mm256_fmadd_pd(av3, b0, c30);
                c31 = _mm256_fmadd_pd(av3, b1, c31);
            }
            _mm256_storeu_pd(c + (i + 0) * n + j, c00);
            _mm256_storeu_pd(c + (i + 0) * n + j + 4, c01);
            _mm256_storeu_pd(c + (i + 1) * n + j, c10);
            _mm256_storeu_pd(c + (i + 1) * n + j + 4, c11);
            _mm256_storeu_pd(c + (i + 2) * n + j, c20);
            _mm256_storeu_pd(c + (i + 2) * n + j + 4, c21);
            _mm256_storeu_pd(c + (i + 3) * n + j, c30);
            _mm256_storeu_pd(c + (i + 3) * n + j + 4, c31);
        }
        // column tail for the 4-row block
        for (; j < n; ++j) {
            double s0 = c[(i + 0) * n + j];
            double s1 = c[(i + 1) * n + j];
            double s2 = c[(i + 2) * n + j];
            double s3 = c[(i + 3) * n + j];
            for (std::size_t kk = 0; kk < k; ++kk) {
                const double bv = b[kk * n + j];
                s0 += a0[kk] * bv;
                s1 += a1[kk] * bv;
                s2 += a2[kk] * bv;
                s3 += a3[kk] * bv;
            }
            c[(i + 0) * n + j] = s0;
            c[(i + 1) * n + j] = s1;
            c[(i + 2) * n + j] = s2;
            c[(i + 3) * n + j] = s3;
        }
    }
    // row tail
    for (; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            axpy_avx2(arow[kk], b + kk * n, crow, n);
        }
    }
}

void adam_update_avx2(double* p, const double* g, double* m, double* v, std::size_t n, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d b1 = _mm256_set1_pd(beta1);
    const __m256d b2 = _mm256_set1_pd(beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - beta2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        // same expression shape as the scalar reference: a*b + c*d via mul/add
        __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                   _mm256_mul_pd(omb1, gv));
        __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(omb2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d denom =
            _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, bc2v)), epsv);
        const __m256d stepv =
            _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, bc1v)), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), stepv));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
        p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
    }
}

}  // namespace

namespace detail {

const KernelTable avx2_table = {
    dot_avx2, axpy_avx2, sum_squares_avx2, min_sqdist3_avx2, gemm_nn_avx2, adam_update_avx2,
};

}  // namespace detail
}  // namespace cadseq::kernels
