#include <cmath>

#include "cadseq/latentgan.hpp"
#include "doctest.h"

using namespace cadseq;

namespace {

Mat gaussian(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    for (double& v : m.d) v = rng.normal();
    return m;
}

// critic with no hidden layers: c(x) = w . x + b
Mlp linear_critic(const std::vector<double>& w) {
    Rng rng(0);
    Mlp mlp(static_cast<int>(w.size()), 1, 0, 1, rng);
    for (std::size_t i = 0; i < w.size(); ++i) mlp.w[0].at(i, 0) = w[i];
    mlp.b[0].at(0, 0) = 0.3;
    return mlp;
}

}  // namespace

TEST_CASE("gradient penalty of a linear critic is (|w| - 1)^2") {
    Rng rng(5);
    const Mat real = gaussian(rng, 8, 3);
    const Mat fake = gaussian(rng, 8, 3);
    std::vector<double> eps(8);
    for (double& e : eps) e = rng.uniform();

    CHECK(gradient_penalty(linear_critic({1.0, 0.0, 0.0}), real, fake, eps) ==
          doctest::Approx(0.0));
    CHECK(gradient_penalty(linear_critic({3.0, 0.0, 0.0}), real, fake, eps) ==
          doctest::Approx(4.0));
    // |w| = 3 along a diagonal too
    const double c = 3.0 / std::sqrt(3.0);
    CHECK(gradient_penalty(linear_critic({c, c, c}), real, fake, eps) == doctest::Approx(4.0));
}

TEST_CASE("gp is invariant to swapping real/fake with eps -> 1-eps") {
    Rng rng(6);
    Mlp critic(4, 8, 2, 1, rng);
    const Mat real = gaussian(rng, 10, 4);
    const Mat fake = gaussian(rng, 10, 4);
    std::vector<double> eps(10), flipped(10);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        eps[i] = rng.uniform();
        flipped[i] = 1.0 - eps[i];
    }
    const double a = gradient_penalty(critic, real, fake, eps);
    const double b = gradient_penalty(critic, fake, real, flipped);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("critic input gradient matches finite differences") {
    Rng rng(7);
    Mlp critic(3, 6, 2, 1, rng);
    const Mat x = gaussian(rng, 4, 3);
    const Mat g = critic_input_gradient(critic, x);
    const double eps = 1e-6;
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            Mat xp = x, xm = x;
            xp.at(i, j) += eps;
            xm.at(i, j) -= eps;
            const double numeric =
                (critic.forward(xp).at(i, 0) - critic.forward(xm).at(i, 0)) / (2 * eps);
            CHECK(g.at(i, j) == doctest::Approx(numeric).epsilon(1e-3));
        }
    }
}

TEST_CASE("gradient penalty parameter gradients match finite differences") {
    Rng rng(8);
    Mlp critic(3, 5, 2, 1, rng);
    const Mat xhat = gaussian(rng, 6, 3);

    std::vector<Mat> dw, db;
    for (const Mat& w : critic.w) dw.emplace_back(w.rows, w.cols);
    for (const Mat& b : critic.b) db.emplace_back(b.rows, b.cols);
    const double base = gradient_penalty_backward(critic, xhat, dw, db);
    CHECK(base >= 0.0);

    const double eps = 1e-5;
    const auto penalty_of = [&](const Mlp& c) {
        std::vector<Mat> tw, tb;
        for (const Mat& w : c.w) tw.emplace_back(w.rows, w.cols);
        for (const Mat& b : c.b) tb.emplace_back(b.rows, b.cols);
        Mlp copy = c;
        return gradient_penalty_backward(copy, xhat, tw, tb);
    };
    for (std::size_t l = 0; l < critic.w.size(); ++l) {
        for (std::size_t k = 0; k < critic.w[l].size(); k += 3) {
            Mlp plus = critic, minus = critic;
            plus.w[l].d[k] += eps;
            minus.w[l].d[k] -= eps;
            const double numeric = (penalty_of(plus) - penalty_of(minus)) / (2 * eps);
            const double analytic = dw[l].d[k];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            CHECK(std::abs(analytic - numeric) / denom < 1e-3);
        }
    }
}

TEST_CASE("generator output shape; zero gp weight reduces to plain wgan") {
    GanConfig cfg = GanConfig::desk(16);
    LatentGan gan(cfg, 4);
    const Mat z = gan.generate_latents(5, 9);
    CHECK(z.rows == 5);
    CHECK(z.cols == 16);
    for (double v : z.d) CHECK(std::isfinite(v));

    Rng rng(10);
    GanConfig plain = cfg;
    plain.gp_weight = 0.0;
    LatentGan a(cfg, 123), b(plain, 123);
    const Mat real = gaussian(rng, cfg.batch, cfg.latent_dim);
    const GanStepStats sa = a.train_step(real);
    const GanStepStats sb = b.train_step(real);
    // loss decomposition: critic_loss = -gap + gp_weight * penalty
    CHECK(sa.critic_loss ==
          doctest::Approx(-sa.critic_gap + cfg.gp_weight * sa.penalty).epsilon(1e-12));
    CHECK(sb.critic_loss == doctest::Approx(-sb.critic_gap).epsilon(1e-12));
}

TEST_CASE("training step counts: 5 critic updates per generator update") {
    GanConfig cfg = GanConfig::desk(8);
    cfg.batch = 8;
    LatentGan gan(cfg, 77);
    Rng rng(78);
    for (int i = 0; i < 3; ++i) (void)gan.train_step(gaussian(rng, cfg.batch, cfg.latent_dim));
    CHECK(gan.step() == 3);

    // checkpoint round-trip preserves generated output
    gan.save("gan_ckpt_test.bin");
    const LatentGan back = LatentGan::load("gan_ckpt_test.bin");
    const Mat z1 = gan.generate_latents(4, 5);
    const Mat z2 = back.generate_latents(4, 5);
    CHECK(z1.d == z2.d);
    std::remove("gan_ckpt_test.bin");
}
