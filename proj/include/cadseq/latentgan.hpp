#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cadseq/autoencoder.hpp"
#include "cadseq/tensor.hpp"

namespace cadseq {

struct GanConfig {
    int noise_dim = 64;
    int hidden_dim = 512;
    int hidden_layers = 4;
    int latent_dim = 256;  // = the autoencoder's d_model
    int critic_iters = 5;
    double gp_weight = 10.0;
    double lr = 2e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    int batch = 256;
    int iters = 200000;

    static GanConfig paper(int latent_dim) {
        GanConfig c;
        c.latent_dim = latent_dim;
        return c;
    }
    static GanConfig desk(int latent_dim) {
        GanConfig c;
        c.latent_dim = latent_dim;
        c.noise_dim = 8;
        c.hidden_dim = 64;
        c.batch = 32;
        c.iters = 2000;
        return c;
    }
};

// Plain MLP with leaky-ReLU hidden activations (slope 0.2), linear output,
// no normalization layers.
struct Mlp {
    std::vector<Mat> w;  // per layer, in x out
    std::vector<Mat> b;  // per layer, 1 x out
    double leak = 0.2;

    Mlp() = default;
    Mlp(int in, int hidden, int hidden_layers, int out, Rng& rng);
    int in_dim() const { return static_cast<int>(w.front().rows); }
    int out_dim() const { return static_cast<int>(w.back().cols); }
    Mat forward(const Mat& x) const;
};

// Per-row gradient of the critic's scalar output with respect to its input.
Mat critic_input_gradient(const Mlp& critic, const Mat& x);

// mean over samples of (||grad_xhat critic(xhat)||_2 - 1)^2, with
// xhat = eps*real + (1-eps)*fake per row. `eps` must have one entry per row.
double gradient_penalty(const Mlp& critic, const Mat& real, const Mat& fake,
                        std::span<const double> eps);

// Same penalty plus its analytic gradient with respect to the critic
// parameters (double backprop; activation masks treated as locally constant).
double gradient_penalty_backward(const Mlp& critic, const Mat& xhat, std::vector<Mat>& dw,
                                 std::vector<Mat>& db);

struct GanStepStats {
    double critic_loss = 0.0;   // E[c(fake)] - E[c(real)] + gp_weight * GP
    double gen_loss = 0.0;      // -E[c(fake)]
    double critic_gap = 0.0;    // E[c(real)] - E[c(fake)] at the last critic update
    double penalty = 0.0;
};

class LatentGan {
public:
    LatentGan(const GanConfig& cfg, uint64_t seed);

    const GanConfig& config() const { return cfg_; }
    Mlp& generator() { return gen_; }
    Mlp& critic() { return critic_; }
    const Mlp& generator() const { return gen_; }
    const Mlp& critic() const { return critic_; }
    uint64_t step() const { return step_; }
    uint64_t critic_updates() const { return critic_updates_; }
    uint64_t gen_updates() const { return gen_updates_; }

    // critic_iters critic updates followed by one generator update.
    GanStepStats train_step(const Mat& real_latents);

    Mat generate_latents(int n, uint64_t seed) const;

    void save(const std::string& path) const;
    static LatentGan load(const std::string& path);

private:
    GanConfig cfg_;
    Mlp gen_, critic_;
    std::vector<Mat> gen_m_, gen_v_, gen_bm_, gen_bv_;
    std::vector<Mat> critic_m_, critic_v_, critic_bm_, critic_bv_;
    uint64_t step_ = 0;
    uint64_t critic_updates_ = 0;
    uint64_t gen_updates_ = 0;
    Rng rng_;
};

struct GeneratedModel {
    TokenGrid grid;
    std::optional<CadModel> model;  // absent when the grid fails the grammar
    bool valid = false;             // check_solid_valid outcome
};

// Noise -> generator -> decoder -> detokenize; invalid outputs are flagged,
// not dropped.
std::vector<GeneratedModel> generate_models(const LatentGan& gan, const Autoencoder& ae, int n,
                                            uint64_t seed);

}  // namespace cadseq
