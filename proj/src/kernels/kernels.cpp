#include "cadseq/kernels.hpp"

namespace cadseq::kernels {
namespace {

using detail::KernelTable;

const KernelTable* resolve(Backend b) {
    if (b == Backend::Auto) b = cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
    if (b == Backend::Avx2 && !cpu_has_avx2()) b = Backend::Scalar;
    return b == Backend::Avx2 ? &detail::avx2_table : &detail::scalar_table;
}

const KernelTable* active = nullptr;
Backend active_kind = Backend::Scalar;

const KernelTable* table() {
    if (!active) set_backend(Backend::Auto);
    return active;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void set_backend(Backend b) {
    active = resolve(b);
    active_kind = (active == &detail::avx2_table) ? Backend::Avx2 : Backend::Scalar;
}

Backend active_backend() {
    table();
    return active_kind;
}

double dot(const double* a, const double* b, std::size_t n) { return table()->dot(a, b, n); }

void axpy(double a, const double* x, double* y, std::size_t n) { table()->axpy(a, x, y, n); }

double sum_squares(const double* a, std::size_t n) { return table()->sum_squares(a, n); }

double min_sqdist3(double qx, double qy, double qz, const double* xs, const double* ys,
                   const double* zs, std::size_t n) {
    return table()->min_sqdist3(qx, qy, qz, xs, ys, zs, n);
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
             std::size_t k) {
    table()->gemm_nn(a, b, c, m, n, k);
}

void adam_update(double* p, const double* g, double* m, double* v, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bc1, double bc2) {
    table()->adam_update(p, g, m, v, n, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace cadseq::kernels
