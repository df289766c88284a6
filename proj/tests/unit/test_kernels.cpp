#include <array>
#include <cmath>
#include <vector>

#include "cadseq/kernels.hpp"
#include "cadseq/rng.hpp"
#include "doctest.h"

using namespace cadseq;
namespace k = cadseq::kernels;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

struct BackendGuard {
    ~BackendGuard() { k::set_backend(k::Backend::Auto); }
};

}  // namespace

TEST_CASE("scalar and avx2 kernels agree") {
    if (!k::cpu_has_avx2()) return;  // scalar-only host: dispatch covered elsewhere
    BackendGuard guard;
    Rng rng(1234);

    for (const std::size_t n : {1UL, 3UL, 4UL, 7UL, 64UL, 1001UL}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);

        k::set_backend(k::Backend::Scalar);
        const double dot_s = k::dot(a.data(), b.data(), n);
        const double sq_s = k::sum_squares(a.data(), n);
        k::set_backend(k::Backend::Avx2);
        const double dot_v = k::dot(a.data(), b.data(), n);
        const double sq_v = k::sum_squares(a.data(), n);
        CHECK(dot_v == doctest::Approx(dot_s).epsilon(1e-12));
        CHECK(sq_v == doctest::Approx(sq_s).epsilon(1e-12));

        // axpy fuses into FMA in the vector path
        auto ys = random_vec(rng, n);
        auto yv = ys;
        k::set_backend(k::Backend::Scalar);
        k::axpy(0.37, a.data(), ys.data(), n);
        k::set_backend(k::Backend::Avx2);
        k::axpy(0.37, a.data(), yv.data(), n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(yv[i] == doctest::Approx(ys[i]).epsilon(1e-13));
    }
}

TEST_CASE("min_sqdist3 is bit-identical across backends") {
    if (!k::cpu_has_avx2()) return;
    BackendGuard guard;
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(300);
        const auto xs = random_vec(rng, n);
        const auto ys = random_vec(rng, n);
        const auto zs = random_vec(rng, n);
        const double qx = rng.uniform(-1, 1), qy = rng.uniform(-1, 1), qz = rng.uniform(-1, 1);
        k::set_backend(k::Backend::Scalar);
        const double s = k::min_sqdist3(qx, qy, qz, xs.data(), ys.data(), zs.data(), n);
        k::set_backend(k::Backend::Avx2);
        const double v = k::min_sqdist3(qx, qy, qz, xs.data(), ys.data(), zs.data(), n);
        CHECK(s == v);  // exact
    }
}

TEST_CASE("adam_update is bit-identical across backends") {
    if (!k::cpu_has_avx2()) return;
    BackendGuard guard;
    Rng rng(42);
    const std::size_t n = 131;
    auto p1 = random_vec(rng, n);
    auto g = random_vec(rng, n);
    auto m1 = random_vec(rng, n, 0.0, 0.1);
    auto v1 = random_vec(rng, n, 0.0, 0.1);
    auto p2 = p1, m2 = m1, v2 = v1;

    k::set_backend(k::Backend::Scalar);
    k::adam_update(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1.1,
                   1.05);
    k::set_backend(k::Backend::Avx2);
    k::adam_update(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1.1,
                   1.05);
    CHECK(p1 == p2);
    CHECK(m1 == m2);
    CHECK(v1 == v2);
}

TEST_CASE("gemm_nn matches the scalar reference") {
    if (!k::cpu_has_avx2()) return;
    BackendGuard guard;
    Rng rng(9);
    for (const auto [m, n, kk] : {std::array<std::size_t, 3>{1, 1, 1},
                                  std::array<std::size_t, 3>{5, 9, 3},
                                  std::array<std::size_t, 3>{4, 8, 16},
                                  std::array<std::size_t, 3>{7, 13, 11},
                                  std::array<std::size_t, 3>{60, 64, 64}}) {
        const auto a = random_vec(rng, m * kk);
        const auto b = random_vec(rng, kk * n);
        std::vector<double> cs(m * n, 0.5), cv(m * n, 0.5);
        k::set_backend(k::Backend::Scalar);
        k::gemm_nn(a.data(), b.data(), cs.data(), m, n, kk);
        k::set_backend(k::Backend::Avx2);
        k::gemm_nn(a.data(), b.data(), cv.data(), m, n, kk);
        for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(cv[i] == doctest::Approx(cs[i]).epsilon(1e-12));
    }
}

TEST_CASE("backend dispatch resolves") {
    BackendGuard guard;
    k::set_backend(k::Backend::Auto);
    const k::Backend active = k::active_backend();
    CHECK((active == k::Backend::Scalar || active == k::Backend::Avx2));
    if (k::cpu_has_avx2()) CHECK(active == k::Backend::Avx2);
    k::set_backend(k::Backend::Scalar);
    CHECK(k::active_backend() == k::Backend::Scalar);
}
