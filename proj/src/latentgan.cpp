// WGAN-GP over the autoencoder's latent space. The gradient penalty needs the
// derivative of the critic's input gradient with respect to the critic
// parameters; for a leaky-ReLU MLP that second backward pass is written out
// explicitly below, with the activation masks held fixed (their derivative is
// zero almost everywhere).

#include <cmath>

#include "cadseq/checkpoint.hpp"
#include "cadseq/geometry.hpp"
#include "cadseq/kernels.hpp"
#include "cadseq/latentgan.hpp"

namespace cadseq {

namespace {

struct MlpCache {
    Mat x;                 // input batch
    std::vector<Mat> pre;  // pre-activations per hidden layer
    std::vector<Mat> act;  // post-activations (inputs to the next layer)
};

Mat mlp_forward_cached(const Mlp& mlp, const Mat& x, MlpCache* cache) {
    const std::size_t layers = mlp.w.size();
    if (cache) {
        cache->x = x;
        cache->pre.clear();
        cache->act.clear();
    }
    Mat a = x;
    for (std::size_t l = 0; l < layers; ++l) {
        Mat z(a.rows, mlp.w[l].cols);
        for (std::size_t i = 0; i < z.rows; ++i)
            std::copy(mlp.b[l].d.begin(), mlp.b[l].d.end(), z.row(i));
        matmul_nn(a, mlp.w[l], z);
        if (l + 1 < layers) {
            if (cache) cache->pre.push_back(z);
            for (double& v : z.d) v = v > 0.0 ? v : mlp.leak * v;
            if (cache) cache->act.push_back(z);
        }
        a = std::move(z);
    }
    return a;
}

// dout -> parameter grads (accumulated); returns input grads when wanted.
void mlp_backward(const Mlp& mlp, const MlpCache& cache, Mat dout, std::vector<Mat>& dw,
                  std::vector<Mat>& db, Mat* dx) {
    const std::size_t layers = mlp.w.size();
    for (std::size_t li = layers; li-- > 0;) {
        const Mat& input = (li == 0) ? cache.x : cache.act[li - 1];
        matmul_tn(input, dout, dw[li]);
        for (std::size_t i = 0; i < dout.rows; ++i)
            kernels::axpy(1.0, dout.row(i), db[li].row(0), dout.cols);
        if (li == 0 && !dx) break;
        Mat din(input.rows, input.cols);
        matmul_nt(dout, mlp.w[li], din);
        if (li == 0) {
            if (dx) {
                for (std::size_t i = 0; i < din.size(); ++i) dx->d[i] += din.d[i];
            }
            break;
        }
        const Mat& pre = cache.pre[li - 1];
        for (std::size_t i = 0; i < din.size(); ++i) {
            if (pre.d[i] <= 0.0) din.d[i] *= mlp.leak;
        }
        dout = std::move(din);
    }
}

std::vector<Mat> zeros_like(const std::vector<Mat>& src) {
    std::vector<Mat> out;
    out.reserve(src.size());
    for (const Mat& m : src) out.emplace_back(m.rows, m.cols);
    return out;
}

}  // namespace

Mlp::Mlp(int in, int hidden, int hidden_layers, int out, Rng& rng) {
    int prev = in;
    for (int l = 0; l < hidden_layers; ++l) {
        w.emplace_back(prev, hidden);
        b.emplace_back(1, hidden);
        prev = hidden;
    }
    w.emplace_back(prev, out);
    b.emplace_back(1, out);
    for (Mat& m : w) {
        const double bound = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
        for (double& v : m.d) v = rng.uniform(-bound, bound);
    }
}

Mat Mlp::forward(const Mat& x) const { return mlp_forward_cached(*this, x, nullptr); }

// --- gradient penalty -------------------------------------------------------------

namespace {

// Input-gradient rows for a batch, keeping the intermediate products needed
// by the second backward pass.
struct InputGradCache {
    MlpCache fwd;
    std::vector<Mat> r;  // r[l]: gradient w.r.t. the input of layer l (batch rows)
    std::vector<Mat> s;  // s[l]: masked gradient above layer l's matmul
    Mat g;               // r[0]: gradient w.r.t. the network input
};

void input_gradient_cached(const Mlp& critic, const Mat& x, InputGradCache& cache) {
    const std::size_t layers = critic.w.size();
    (void)mlp_forward_cached(critic, x, &cache.fwd);
    cache.r.assign(layers + 1, Mat());
    cache.s.assign(layers, Mat());

    // top: d(out)/d(a_last) = W_last^T, identical for every row
    Mat r(x.rows, critic.w.back().rows);
    for (std::size_t i = 0; i < r.rows; ++i) {
        for (std::size_t j = 0; j < r.cols; ++j) r.at(i, j) = critic.w.back().at(j, 0);
    }
    cache.r[layers - 1] = r;
    for (std::size_t li = layers - 1; li-- > 0;) {
        const Mat& pre = cache.fwd.pre[li];
        Mat s = cache.r[li + 1];
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (pre.d[i] <= 0.0) s.d[i] *= critic.leak;
        }
        Mat rl(x.rows, critic.w[li].rows);
        matmul_nt(s, critic.w[li], rl);
        cache.s[li] = std::move(s);
        cache.r[li] = std::move(rl);
    }
    cache.g = cache.r[0];
}

}  // namespace

Mat critic_input_gradient(const Mlp& critic, const Mat& x) {
    InputGradCache cache;
    input_gradient_cached(critic, x, cache);
    return cache.g;
}

double gradient_penalty(const Mlp& critic, const Mat& real, const Mat& fake,
                        std::span<const double> eps) {
    if (real.rows != fake.rows || real.cols != fake.cols || eps.size() != real.rows)
        throw CadError(ErrorCode::ShapeMismatch, "gradient penalty batch shapes");
    Mat xhat(real.rows, real.cols);
    for (std::size_t i = 0; i < real.rows; ++i) {
        for (std::size_t j = 0; j < real.cols; ++j)
            xhat.at(i, j) = eps[i] * real.at(i, j) + (1.0 - eps[i]) * fake.at(i, j);
    }
    const Mat g = critic_input_gradient(critic, xhat);
    double penalty = 0.0;
    for (std::size_t i = 0; i < g.rows; ++i) {
        const double norm = std::sqrt(kernels::sum_squares(g.row(i), g.cols));
        penalty += (norm - 1.0) * (norm - 1.0);
    }
    return penalty / static_cast<double>(g.rows);
}

double gradient_penalty_backward(const Mlp& critic, const Mat& xhat, std::vector<Mat>& dw,
                                 std::vector<Mat>& db) {
    const std::size_t layers = critic.w.size();
    InputGradCache cache;
    input_gradient_cached(critic, xhat, cache);

    const double inv_b = 1.0 / static_cast<double>(xhat.rows);
    double penalty = 0.0;
    Mat adj(xhat.rows, xhat.cols);  // dP/dg
    for (std::size_t i = 0; i < xhat.rows; ++i) {
        const double norm = std::sqrt(kernels::sum_squares(cache.g.row(i), cache.g.cols));
        penalty += (norm - 1.0) * (norm - 1.0) * inv_b;
        const double coef = norm > 1e-12 ? 2.0 * (norm - 1.0) / norm * inv_b : 0.0;
        kernels::axpy(coef, cache.g.row(i), adj.row(i), cache.g.cols);
    }

    // reverse the input-gradient recurrence r[l] = (mask * r[l+1]) * W[l]^T
    Mat a_r = adj;  // adjoint of r[l], starting at l = 0
    for (std::size_t li = 0; li + 1 < layers; ++li) {
        Mat a_s(a_r.rows, critic.w[li].cols);
        matmul_nn(a_r, critic.w[li], a_s);           // adjoint of s[li]
        matmul_tn(a_r, cache.s[li], dw[li]);          // dW[li] += a_r^T s[li]
        const Mat& pre = cache.fwd.pre[li];
        for (std::size_t i = 0; i < a_s.size(); ++i) {
            if (pre.d[i] <= 0.0) a_s.d[i] *= critic.leak;
        }
        a_r = std::move(a_s);                         // adjoint of r[li+1]
    }
    // top layer: r[last] rows equal W_last^T
    for (std::size_t i = 0; i < a_r.rows; ++i) {
        for (std::size_t j = 0; j < a_r.cols; ++j) dw[layers - 1].at(j, 0) += a_r.at(i, j);
    }
    (void)db;  // biases do not enter the input gradient (masks held fixed)
    return penalty;
}

// --- training ---------------------------------------------------------------------

LatentGan::LatentGan(const GanConfig& cfg, uint64_t seed) : cfg_(cfg), rng_(Rng::mix(seed, 11)) {
    Rng init(Rng::mix(seed, 10));
    gen_ = Mlp(cfg.noise_dim, cfg.hidden_dim, cfg.hidden_layers, cfg.latent_dim, init);
    critic_ = Mlp(cfg.latent_dim, cfg.hidden_dim, cfg.hidden_layers, 1, init);
    gen_m_ = zeros_like(gen_.w);
    gen_v_ = zeros_like(gen_.w);
    gen_bm_ = zeros_like(gen_.b);
    gen_bv_ = zeros_like(gen_.b);
    critic_m_ = zeros_like(critic_.w);
    critic_v_ = zeros_like(critic_.w);
    critic_bm_ = zeros_like(critic_.b);
    critic_bv_ = zeros_like(critic_.b);
}

namespace {

Mat gaussian_noise(int rows, int cols, Rng& rng) {
    Mat m(rows, cols);
    for (double& v : m.d) v = rng.normal();
    return m;
}

void adam_apply(std::vector<Mat>& params, const std::vector<Mat>& grads, std::vector<Mat>& m,
                std::vector<Mat>& v, double lr, double beta1, double beta2, uint64_t t) {
    const double bc1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(t)));
    const double bc2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(t)));
    for (std::size_t i = 0; i < params.size(); ++i) {
        kernels::adam_update(params[i].d.data(), grads[i].d.data(), m[i].d.data(),
                             v[i].d.data(), params[i].size(), lr, beta1, beta2, 1e-8, bc1, bc2);
    }
}

double mat_mean(const Mat& m) {
    double acc = 0.0;
    for (double v : m.d) acc += v;
    return acc / static_cast<double>(m.size());
}

}  // namespace

GanStepStats LatentGan::train_step(const Mat& real_latents) {
    if (static_cast<int>(real_latents.cols) != cfg_.latent_dim)
        throw CadError(ErrorCode::ShapeMismatch, "real latents have wrong width");
    const std::size_t batch = real_latents.rows;
    const double inv_b = 1.0 / static_cast<double>(batch);
    GanStepStats stats;

    for (int it = 0; it < cfg_.critic_iters; ++it) {
        const Mat noise = gaussian_noise(static_cast<int>(batch), cfg_.noise_dim, rng_);
        const Mat fake = gen_.forward(noise);

        std::vector<Mat> dw = zeros_like(critic_.w);
        std::vector<Mat> db = zeros_like(critic_.b);

        // E[c(fake)] - E[c(real)]
        MlpCache fake_cache, real_cache;
        const Mat c_fake = mlp_forward_cached(critic_, fake, &fake_cache);
        const Mat c_real = mlp_forward_cached(critic_, real_latents, &real_cache);
        Mat dfake(c_fake.rows, 1), dreal(c_real.rows, 1);
        for (std::size_t i = 0; i < batch; ++i) {
            dfake.at(i, 0) = inv_b;
            dreal.at(i, 0) = -inv_b;
        }
        mlp_backward(critic_, fake_cache, dfake, dw, db, nullptr);
        mlp_backward(critic_, real_cache, dreal, dw, db, nullptr);

        // gradient penalty on the interpolates
        Mat xhat(batch, cfg_.latent_dim);
        for (std::size_t i = 0; i < batch; ++i) {
            const double eps = rng_.uniform();
            for (int j = 0; j < cfg_.latent_dim; ++j)
                xhat.at(i, j) = eps * real_latents.at(i, j) + (1.0 - eps) * fake.at(i, j);
        }
        std::vector<Mat> gp_dw = zeros_like(critic_.w);
        std::vector<Mat> gp_db = zeros_like(critic_.b);
        const double penalty = gradient_penalty_backward(critic_, xhat, gp_dw, gp_db);
        for (std::size_t l = 0; l < dw.size(); ++l) {
            kernels::axpy(cfg_.gp_weight, gp_dw[l].d.data(), dw[l].d.data(), dw[l].size());
            kernels::axpy(cfg_.gp_weight, gp_db[l].d.data(), db[l].d.data(), db[l].size());
        }

        ++critic_updates_;
        adam_apply(critic_.w, dw, critic_m_, critic_v_, cfg_.lr, cfg_.adam_beta1,
                   cfg_.adam_beta2, critic_updates_);
        adam_apply(critic_.b, db, critic_bm_, critic_bv_, cfg_.lr, cfg_.adam_beta1,
                   cfg_.adam_beta2, critic_updates_);

        if (it == cfg_.critic_iters - 1) {
            stats.critic_loss = mat_mean(c_fake) - mat_mean(c_real) + cfg_.gp_weight * penalty;
            stats.critic_gap = mat_mean(c_real) - mat_mean(c_fake);
            stats.penalty = penalty;
        }
    }

    // one generator update: maximize E[c(fake)]
    {
        const Mat noise = gaussian_noise(static_cast<int>(batch), cfg_.noise_dim, rng_);
        MlpCache gen_cache;
        const Mat fake = mlp_forward_cached(gen_, noise, &gen_cache);
        MlpCache critic_cache;
        const Mat c_fake = mlp_forward_cached(critic_, fake, &critic_cache);
        stats.gen_loss = -mat_mean(c_fake);

        Mat dout(c_fake.rows, 1);
        for (std::size_t i = 0; i < batch; ++i) dout.at(i, 0) = -inv_b;
        std::vector<Mat> scratch_dw = zeros_like(critic_.w);
        std::vector<Mat> scratch_db = zeros_like(critic_.b);
        Mat dfake(fake.rows, fake.cols);
        mlp_backward(critic_, critic_cache, dout, scratch_dw, scratch_db, &dfake);

        std::vector<Mat> dw = zeros_like(gen_.w);
        std::vector<Mat> db = zeros_like(gen_.b);
        mlp_backward(gen_, gen_cache, dfake, dw, db, nullptr);
        ++gen_updates_;
        adam_apply(gen_.w, dw, gen_m_, gen_v_, cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2,
                   gen_updates_);
        adam_apply(gen_.b, db, gen_bm_, gen_bv_, cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2,
                   gen_updates_);
    }

    ++step_;
    for (const Mat& m : gen_.w) {
        if (!all_finite(m)) throw CadError(ErrorCode::NonFinite, "generator weights diverged");
    }
    for (const Mat& m : critic_.w) {
        if (!all_finite(m)) throw CadError(ErrorCode::NonFinite, "critic weights diverged");
    }
    return stats;
}

Mat LatentGan::generate_latents(int n, uint64_t seed) const {
    Rng rng(Rng::mix(seed, 21));
    const Mat noise = gaussian_noise(n, cfg_.noise_dim, rng);
    return gen_.forward(noise);
}

// --- checkpoints --------------------------------------------------------------------

namespace {

void push_mlp(std::vector<NamedBlob>& blobs, const std::string& prefix, const Mlp& mlp,
              const std::vector<Mat>& m, const std::vector<Mat>& v, const std::vector<Mat>& bm,
              const std::vector<Mat>& bv) {
    for (std::size_t l = 0; l < mlp.w.size(); ++l) {
        const std::string base = prefix + std::to_string(l);
        blobs.push_back({base + ".w", mlp.w[l]});
        blobs.push_back({base + ".b", mlp.b[l]});
        blobs.push_back({base + ".w#m", m[l]});
        blobs.push_back({base + ".w#v", v[l]});
        blobs.push_back({base + ".b#m", bm[l]});
        blobs.push_back({base + ".b#v", bv[l]});
    }
}

void pull_mlp(const std::vector<NamedBlob>& blobs, const std::string& prefix, Mlp& mlp,
              std::vector<Mat>& m, std::vector<Mat>& v, std::vector<Mat>& bm,
              std::vector<Mat>& bv) {
    for (std::size_t l = 0; l < mlp.w.size(); ++l) {
        const std::string base = prefix + std::to_string(l);
        const auto fetch = [&](const std::string& name) -> const Mat& {
            const Mat* blob = find_blob(blobs, name);
            if (!blob) throw CadError(ErrorCode::IoError, "checkpoint missing " + name);
            return *blob;
        };
        mlp.w[l] = fetch(base + ".w");
        mlp.b[l] = fetch(base + ".b");
        m[l] = fetch(base + ".w#m");
        v[l] = fetch(base + ".w#v");
        bm[l] = fetch(base + ".b#m");
        bv[l] = fetch(base + ".b#v");
    }
}

}  // namespace

void LatentGan::save(const std::string& path) const {
    std::vector<NamedBlob> blobs;
    Mat meta(1, 12);
    meta.d = {static_cast<double>(cfg_.noise_dim), static_cast<double>(cfg_.hidden_dim),
              static_cast<double>(cfg_.hidden_layers), static_cast<double>(cfg_.latent_dim),
              static_cast<double>(cfg_.critic_iters), cfg_.gp_weight, cfg_.lr, cfg_.adam_beta1,
              cfg_.adam_beta2, static_cast<double>(cfg_.batch), static_cast<double>(step_),
              static_cast<double>(cfg_.iters)};
    blobs.push_back({"meta.gan_config", std::move(meta)});
    push_mlp(blobs, "gen", gen_, gen_m_, gen_v_, gen_bm_, gen_bv_);
    push_mlp(blobs, "critic", critic_, critic_m_, critic_v_, critic_bm_, critic_bv_);
    write_blobs(path, blobs);
}

LatentGan LatentGan::load(const std::string& path) {
    const std::vector<NamedBlob> blobs = read_blobs(path);
    const Mat* meta = find_blob(blobs, "meta.gan_config");
    if (!meta || meta->size() < 12)
        throw CadError(ErrorCode::IoError, "checkpoint missing GAN config");
    GanConfig cfg;
    cfg.noise_dim = static_cast<int>(meta->d[0]);
    cfg.hidden_dim = static_cast<int>(meta->d[1]);
    cfg.hidden_layers = static_cast<int>(meta->d[2]);
    cfg.latent_dim = static_cast<int>(meta->d[3]);
    cfg.critic_iters = static_cast<int>(meta->d[4]);
    cfg.gp_weight = meta->d[5];
    cfg.lr = meta->d[6];
    cfg.adam_beta1 = meta->d[7];
    cfg.adam_beta2 = meta->d[8];
    cfg.batch = static_cast<int>(meta->d[9]);
    cfg.iters = static_cast<int>(meta->d[11]);
    LatentGan gan(cfg, 0);
    gan.step_ = static_cast<uint64_t>(meta->d[10]);
    gan.critic_updates_ = gan.step_ * static_cast<uint64_t>(cfg.critic_iters);
    gan.gen_updates_ = gan.step_;
    pull_mlp(blobs, "gen", gan.gen_, gan.gen_m_, gan.gen_v_, gan.gen_bm_, gan.gen_bv_);
    pull_mlp(blobs, "critic", gan.critic_, gan.critic_m_, gan.critic_v_, gan.critic_bm_,
             gan.critic_bv_);
    return gan;
}

// --- model generation ----------------------------------------------------------------

std::vector<GeneratedModel> generate_models(const LatentGan& gan, const Autoencoder& ae, int n,
                                            uint64_t seed) {
    std::vector<GeneratedModel> out;
    if (n <= 0) return out;
    const Mat latents = gan.generate_latents(n, seed);
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> z(latents.row(i), latents.row(i) + latents.cols);
        GeneratedModel gm;
        gm.grid = to_token_grid(ae.predict_from_latent(z));
        try {
            gm.model = detokenize(gm.grid);
            gm.valid = check_solid_valid(*gm.model, 2000, Rng::mix(seed, 1000 + i));
        } catch (const CadError&) {
            gm.model.reset();
            gm.valid = false;
        }
        out.push_back(std::move(gm));
    }
    return out;
}

}  // namespace cadseq
