// Transformer autoencoder over token grids with a handwritten
// forward/backward pass (no autograd graph). Pre-norm residual blocks;
// the decoder runs learned constant queries with self-attention,
// cross-attention to the latent vector (a length-1 memory) and a
// feed-forward sublayer.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "cadseq/autoencoder.hpp"
#include "cadseq/checkpoint.hpp"
#include "cadseq/kernels.hpp"

namespace cadseq {

namespace {
constexpr double kLnEps = 1e-5;
}

// --- grid helpers ---------------------------------------------------------------

SeqGrid to_seq_grid(const TokenGrid& grid) {
    SeqGrid out(kMaxCommands);
    for (int i = 0; i < kMaxCommands; ++i) out[i] = grid.rows[i];
    return out;
}

TokenGrid to_token_grid(const SeqGrid& grid) {
    if (grid.size() != kMaxCommands)
        throw CadError(ErrorCode::LengthMismatch, "grid length != 60");
    TokenGrid out;
    for (int i = 0; i < kMaxCommands; ++i) out.rows[i] = grid[i];
    return out;
}

// --- parameter store ------------------------------------------------------------

int ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
    Entry e;
    e.name = name;
    e.value = Mat(rows, cols);
    e.m = Mat(rows, cols);
    e.v = Mat(rows, cols);
    entries_.push_back(std::move(e));
    return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

std::size_t ParamStore::total_params() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
}

// --- parameter layout -----------------------------------------------------------

namespace {

struct LnIds {
    int g = -1, b = -1;
};
struct AttnIds {
    // no key bias: softmax scores are invariant to a uniform key shift,
    // which would leave the parameter without a defined gradient
    int wq = -1, bq = -1, wk = -1, wv = -1, bv = -1, wo = -1, bo = -1;
};
struct FfIds {
    int w1 = -1, b1 = -1, w2 = -1, b2 = -1;
};
struct EncBlockIds {
    LnIds ln1;
    AttnIds attn;
    LnIds ln2;
    FfIds ff;
};
struct DecBlockIds {
    LnIds ln1;
    AttnIds self_attn;
    LnIds ln2;
    AttnIds cross;
    LnIds ln3;
    FfIds ff;
};

}  // namespace

struct AeIds {
    int emb_cmd, emb_level, emb_mix, emb_pos;
    std::vector<EncBlockIds> enc;
    LnIds enc_final;
    int dec_query;
    std::vector<DecBlockIds> dec;
    LnIds dec_final;
    int head_type_w, head_type_b, head_param_w, head_param_b;
};

namespace {

LnIds add_ln(ParamStore& p, const std::string& prefix, int d) {
    LnIds ids;
    ids.g = p.add(prefix + ".g", 1, d);
    ids.b = p.add(prefix + ".b", 1, d);
    return ids;
}

AttnIds add_attn(ParamStore& p, const std::string& prefix, int d) {
    AttnIds ids;
    ids.wq = p.add(prefix + ".wq", d, d);
    ids.bq = p.add(prefix + ".bq", 1, d);
    ids.wk = p.add(prefix + ".wk", d, d);
    ids.wv = p.add(prefix + ".wv", d, d);
    ids.bv = p.add(prefix + ".bv", 1, d);
    ids.wo = p.add(prefix + ".wo", d, d);
    ids.bo = p.add(prefix + ".bo", 1, d);
    return ids;
}

FfIds add_ff(ParamStore& p, const std::string& prefix, int d, int ff) {
    FfIds ids;
    ids.w1 = p.add(prefix + ".w1", d, ff);
    ids.b1 = p.add(prefix + ".b1", 1, ff);
    ids.w2 = p.add(prefix + ".w2", ff, d);
    ids.b2 = p.add(prefix + ".b2", 1, d);
    return ids;
}

AeIds build_layout(ParamStore& p, const Hyperparams& hp) {
    AeIds ids;
    const int d = hp.d_model;
    ids.emb_cmd = p.add("emb.cmd", hp.n_cmd_types, d);
    ids.emb_level = p.add("emb.level", hp.n_levels, d);
    ids.emb_mix = p.add("emb.mix", static_cast<std::size_t>(hp.n_param_slots) * d, d);
    ids.emb_pos = p.add("emb.pos", hp.n_commands, d);
    for (int l = 0; l < hp.layers; ++l) {
        const std::string base = "enc" + std::to_string(l);
        EncBlockIds b;
        b.ln1 = add_ln(p, base + ".ln1", d);
        b.attn = add_attn(p, base + ".attn", d);
        b.ln2 = add_ln(p, base + ".ln2", d);
        b.ff = add_ff(p, base + ".ff", d, hp.ff_dim);
        ids.enc.push_back(b);
    }
    ids.enc_final = add_ln(p, "enc.final_ln", d);
    ids.dec_query = p.add("dec.query", hp.n_commands, d);
    for (int l = 0; l < hp.layers; ++l) {
        const std::string base = "dec" + std::to_string(l);
        DecBlockIds b;
        b.ln1 = add_ln(p, base + ".ln1", d);
        b.self_attn = add_attn(p, base + ".self", d);
        b.ln2 = add_ln(p, base + ".ln2", d);
        b.cross = add_attn(p, base + ".cross", d);
        b.ln3 = add_ln(p, base + ".ln3", d);
        b.ff = add_ff(p, base + ".ff", d, hp.ff_dim);
        ids.dec.push_back(b);
    }
    ids.dec_final = add_ln(p, "dec.final_ln", d);
    ids.head_type_w = p.add("head.type.w", d, hp.n_cmd_types);
    ids.head_type_b = p.add("head.type.b", 1, hp.n_cmd_types);
    ids.head_param_w =
        p.add("head.param.w", d, static_cast<std::size_t>(hp.n_param_slots) * hp.n_levels);
    ids.head_param_b = p.add("head.param.b", 1,
                             static_cast<std::size_t>(hp.n_param_slots) * hp.n_levels);
    return ids;
}

bool is_bias_or_gain(const std::string& name) {
    const auto ends_with = [&](const char* suffix) {
        const std::size_t n = std::strlen(suffix);
        return name.size() >= n && name.compare(name.size() - n, n, suffix) == 0;
    };
    return ends_with(".g") || ends_with(".b") || ends_with(".bq") || ends_with(".bv") ||
           ends_with(".bo") || ends_with(".b1") || ends_with(".b2");
}

void init_params(ParamStore& p, Rng& rng) {
    for (auto& e : p.entries()) {
        if (is_bias_or_gain(e.name)) {
            const bool gain = e.name.size() >= 2 && e.name.compare(e.name.size() - 2, 2, ".g") == 0;
            std::fill(e.value.d.begin(), e.value.d.end(), gain ? 1.0 : 0.0);
            continue;
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(e.value.rows + e.value.cols));
        for (double& v : e.value.d) v = rng.uniform(-bound, bound);
    }
}

// --- layer primitives -----------------------------------------------------------

using Grads = std::vector<Mat>;

Grads make_grads(const ParamStore& p) {
    Grads g;
    g.reserve(p.entries().size());
    for (const auto& e : p.entries()) g.emplace_back(e.value.rows, e.value.cols);
    return g;
}

// Y = X * W + b
void linear_forward(const Mat& x, const Mat& w, const Mat& b, Mat& y) {
    y = Mat(x.rows, w.cols);
    for (std::size_t i = 0; i < y.rows; ++i) std::memcpy(y.row(i), b.row(0), w.cols * sizeof(double));
    matmul_nn(x, w, y);
}

// accumulates dW, db and (optionally) dX
void linear_backward(const Mat& x, const Mat& w, const Mat& dy, Mat* dx, Mat& dw, Mat& db) {
    matmul_tn(x, dy, dw);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        kernels::axpy(1.0, dy.row(i), db.row(0), dy.cols);
    }
    if (dx) matmul_nt(dy, w, *dx);
}

struct LnCache {
    Mat x;     // input
    Mat xhat;  // normalized
    Mat y;     // output (= gain * xhat + bias), the sublayer input
    std::vector<double> rstd;
};

void layer_norm_forward(const Mat& x, const Mat& g, const Mat& b, LnCache& cache) {
    const std::size_t d = x.cols;
    cache.x = x;
    cache.xhat = Mat(x.rows, d);
    cache.y = Mat(x.rows, d);
    cache.rstd.assign(x.rows, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += xi[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (xi[j] - mean) * (xi[j] - mean);
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + kLnEps);
        cache.rstd[i] = rstd;
        double* xh = cache.xhat.row(i);
        double* yi = cache.y.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            xh[j] = (xi[j] - mean) * rstd;
            yi[j] = g.d[j] * xh[j] + b.d[j];
        }
    }
}

void layer_norm_backward(const LnCache& cache, const Mat& g, const Mat& dy, Mat& dx, Mat& dg,
                         Mat& db) {
    const std::size_t d = cache.x.cols;
    for (std::size_t i = 0; i < cache.x.rows; ++i) {
        const double* dyi = dy.row(i);
        const double* xh = cache.xhat.row(i);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double dxh = dyi[j] * g.d[j];
            m1 += dxh;
            m2 += dxh * xh[j];
            dg.d[j] += dyi[j] * xh[j];
            db.d[j] += dyi[j];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        double* dxi = dx.row(i);
        const double rstd = cache.rstd[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double dxh = dyi[j] * g.d[j];
            dxi[j] += rstd * (dxh - m1 - xh[j] * m2);
        }
    }
}

void softmax_rows(Mat& s) {
    for (std::size_t i = 0; i < s.rows; ++i) {
        double* row = s.row(i);
        double mx = row[0];
        for (std::size_t j = 1; j < s.cols; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < s.cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (std::size_t j = 0; j < s.cols; ++j) row[j] /= sum;
    }
}

// ds = p * (dp - rowdot(dp, p))
void softmax_backward_rows(const Mat& p, const Mat& dp, Mat& ds) {
    ds = Mat(p.rows, p.cols);
    for (std::size_t i = 0; i < p.rows; ++i) {
        const double* pi = p.row(i);
        const double* dpi = dp.row(i);
        const double s = kernels::dot(dpi, pi, p.cols);
        double* dsi = ds.row(i);
        for (std::size_t j = 0; j < p.cols; ++j) dsi[j] = pi[j] * (dpi[j] - s);
    }
}

struct DropCache {
    Mat mask;  // empty when inactive
};

void dropout_forward(Mat& x, double p, Rng* rng, DropCache& cache) {
    if (!rng || p <= 0.0) return;
    cache.mask = Mat(x.rows, x.cols);
    const double keep = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < x.size(); ++i) {
        cache.mask.d[i] = (rng->uniform() >= p) ? keep : 0.0;
        x.d[i] *= cache.mask.d[i];
    }
}

void dropout_backward(const DropCache& cache, Mat& dy) {
    if (cache.mask.size() == 0) return;
    for (std::size_t i = 0; i < dy.size(); ++i) dy.d[i] *= cache.mask.d[i];
}

Mat head_slice(const Mat& m, int head, int dh) {
    Mat out(m.rows, dh);
    for (std::size_t i = 0; i < m.rows; ++i)
        std::memcpy(out.row(i), m.row(i) + head * dh, dh * sizeof(double));
    return out;
}

void head_accumulate(Mat& target, const Mat& part, int head, int dh) {
    for (std::size_t i = 0; i < target.rows; ++i) {
        double* dst = target.row(i) + head * dh;
        const double* src = part.row(i);
        for (int j = 0; j < dh; ++j) dst[j] += src[j];
    }
}

struct AttnCache {
    Mat q, k, v;             // post-projection
    std::vector<Mat> probs;  // per head
    Mat concat;              // pre-Wo
    DropCache drop;
};

// queries X (Nq x d), memory M (Nk x d); output is dropout(Wo(concat)).
Mat attention_forward(const Mat& x, const Mat& m, const ParamStore& p, const AttnIds& ids,
                      int heads, double dropout, Rng* rng, AttnCache& cache) {
    const int d = static_cast<int>(x.cols);
    const int dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    linear_forward(x, p[ids.wq], p[ids.bq], cache.q);
    cache.k = Mat(m.rows, static_cast<std::size_t>(d));
    matmul_nn(m, p[ids.wk], cache.k);
    linear_forward(m, p[ids.wv], p[ids.bv], cache.v);
    cache.concat = Mat(x.rows, d);
    cache.probs.clear();
    for (int h = 0; h < heads; ++h) {
        const Mat qh = head_slice(cache.q, h, dh);
        const Mat kh = head_slice(cache.k, h, dh);
        const Mat vh = head_slice(cache.v, h, dh);
        Mat s(qh.rows, kh.rows);
        matmul_nt(qh, kh, s);
        for (double& v : s.d) v *= scale;
        softmax_rows(s);
        Mat oh(qh.rows, dh);
        matmul_nn(s, vh, oh);
        head_accumulate(cache.concat, oh, h, dh);
        cache.probs.push_back(std::move(s));
    }
    Mat out;
    linear_forward(cache.concat, p[ids.wo], p[ids.bo], out);
    dropout_forward(out, dropout, rng, cache.drop);
    return out;
}

// dx / dm receive query/memory gradients (accumulated).
void attention_backward(const Mat& x, const Mat& m, const ParamStore& p, const AttnIds& ids,
                        int heads, AttnCache& cache, Mat dout, Grads& g, Mat& dx, Mat& dm) {
    const int d = static_cast<int>(x.cols);
    const int dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    dropout_backward(cache.drop, dout);

    Mat dconcat(x.rows, d);
    linear_backward(cache.concat, p[ids.wo], dout, &dconcat, g[ids.wo], g[ids.bo]);

    Mat dq(cache.q.rows, d), dk(cache.k.rows, d), dv(cache.v.rows, d);
    for (int h = 0; h < heads; ++h) {
        const Mat doh = head_slice(dconcat, h, dh);
        const Mat qh = head_slice(cache.q, h, dh);
        const Mat kh = head_slice(cache.k, h, dh);
        const Mat vh = head_slice(cache.v, h, dh);
        const Mat& probs = cache.probs[h];

        Mat dvh(vh.rows, dh);
        matmul_tn(probs, doh, dvh);
        Mat dp(probs.rows, probs.cols);
        matmul_nt(doh, vh, dp);
        Mat ds;
        softmax_backward_rows(probs, dp, ds);
        for (double& v : ds.d) v *= scale;
        Mat dqh(qh.rows, dh);
        matmul_nn(ds, kh, dqh);
        Mat dkh(kh.rows, dh);
        matmul_tn(ds, qh, dkh);

        head_accumulate(dq, dqh, h, dh);
        head_accumulate(dk, dkh, h, dh);
        head_accumulate(dv, dvh, h, dh);
    }
    linear_backward(x, p[ids.wq], dq, &dx, g[ids.wq], g[ids.bq]);
    matmul_tn(m, dk, g[ids.wk]);
    matmul_nt(dk, p[ids.wk], dm);
    linear_backward(m, p[ids.wv], dv, &dm, g[ids.wv], g[ids.bv]);
}

struct FfCache {
    Mat x_norm;
    Mat h;  // post-ReLU
    DropCache drop;
};

Mat ff_forward(const Mat& x_norm, const ParamStore& p, const FfIds& ids, double dropout, Rng* rng,
               FfCache& cache) {
    cache.x_norm = x_norm;
    linear_forward(x_norm, p[ids.w1], p[ids.b1], cache.h);
    for (double& v : cache.h.d) v = std::max(v, 0.0);
    Mat out;
    linear_forward(cache.h, p[ids.w2], p[ids.b2], out);
    dropout_forward(out, dropout, rng, cache.drop);
    return out;
}

void ff_backward(const ParamStore& p, const FfIds& ids, FfCache& cache, Mat dout, Grads& g,
                 Mat& dx_norm) {
    dropout_backward(cache.drop, dout);
    Mat dh(cache.h.rows, cache.h.cols);
    linear_backward(cache.h, p[ids.w2], dout, &dh, g[ids.w2], g[ids.b2]);
    for (std::size_t i = 0; i < dh.size(); ++i) {
        if (cache.h.d[i] <= 0.0) dh.d[i] = 0.0;
    }
    linear_backward(cache.x_norm, p[ids.w1], dh, &dx_norm, g[ids.w1], g[ids.b1]);
}

// --- full forward cache -----------------------------------------------------------

struct EncBlockCache {
    LnCache ln1;
    AttnCache attn;
    LnCache ln2;
    FfCache ff;
};

struct DecBlockCache {
    LnCache ln1;
    AttnCache self_attn;
    LnCache ln2;
    AttnCache cross;
    LnCache ln3;
    FfCache ff;
};

struct ForwardCache {
    Mat stack;  // Nc x (slots * d) level-embedding stack
    Mat x0;
    std::vector<EncBlockCache> enc;
    LnCache enc_final;
    Mat enc_norm;
    std::vector<double> z;
    Mat mem;  // 1 x d
    std::vector<DecBlockCache> dec;
    LnCache dec_final;
    Mat dec_norm;
    Logits logits;
};

int level_index(int value, const Hyperparams& hp) {
    if (value == -1) return hp.n_levels - 1;  // UNUSED class
    if (value < 0 || value >= hp.n_levels - 1)
        throw CadError(ErrorCode::BadLevel, "slot level " + std::to_string(value), value);
    return value;
}

void embed_forward(const SeqGrid& grid, const ParamStore& p, const AeIds& ids,
                   const Hyperparams& hp, ForwardCache& cache) {
    const int d = hp.d_model;
    const int slots = hp.n_param_slots;
    const std::size_t n = grid.size();
    cache.stack = Mat(n, static_cast<std::size_t>(slots) * d);
    cache.x0 = Mat(n, d);
    const Mat& level = p[ids.emb_level];
    const Mat& cmd = p[ids.emb_cmd];
    const Mat& pos = p[ids.emb_pos];
    for (std::size_t i = 0; i < n; ++i) {
        const int type = grid[i][0];
        if (type < 0 || type >= hp.n_cmd_types)
            throw CadError(ErrorCode::BadLevel, "command type " + std::to_string(type), type);
        double* srow = cache.stack.row(i);
        for (int j = 0; j < slots; ++j) {
            const int lvl = level_index(grid[i][j + 1], hp);
            std::memcpy(srow + static_cast<std::size_t>(j) * d, level.row(lvl),
                        d * sizeof(double));
        }
        double* xrow = cache.x0.row(i);
        const double* crow = cmd.row(type);
        const double* prow = pos.row(i);
        for (int j = 0; j < d; ++j) xrow[j] = crow[j] + prow[j];
    }
    matmul_nn(cache.stack, p[ids.emb_mix], cache.x0);  // += parameter embedding
}

void embed_backward(const SeqGrid& grid, const ParamStore& p, const AeIds& ids,
                    const Hyperparams& hp, const ForwardCache& cache, const Mat& dx0, Grads& g) {
    const int d = hp.d_model;
    const int slots = hp.n_param_slots;
    matmul_tn(cache.stack, dx0, g[ids.emb_mix]);
    Mat dstack(cache.stack.rows, cache.stack.cols);
    matmul_nt(dx0, p[ids.emb_mix], dstack);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const int type = grid[i][0];
        kernels::axpy(1.0, dx0.row(i), g[ids.emb_cmd].row(type), d);
        kernels::axpy(1.0, dx0.row(i), g[ids.emb_pos].row(i), d);
        const double* srow = dstack.row(i);
        for (int j = 0; j < slots; ++j) {
            const int lvl = level_index(grid[i][j + 1], hp);
            kernels::axpy(1.0, srow + static_cast<std::size_t>(j) * d,
                          g[ids.emb_level].row(lvl), d);
        }
    }
}

void encoder_forward(const SeqGrid& grid, const ParamStore& p, const AeIds& ids,
                     const Hyperparams& hp, Rng* rng, ForwardCache& cache) {
    embed_forward(grid, p, ids, hp, cache);
    Mat x = cache.x0;
    cache.enc.resize(hp.layers);
    for (int l = 0; l < hp.layers; ++l) {
        EncBlockCache& bc = cache.enc[l];
        const EncBlockIds& bi = ids.enc[l];
        layer_norm_forward(x, p[bi.ln1.g], p[bi.ln1.b], bc.ln1);
        const Mat attn_out =
            attention_forward(bc.ln1.y, bc.ln1.y, p, bi.attn, hp.heads, hp.dropout, rng, bc.attn);
        for (std::size_t i = 0; i < x.size(); ++i) x.d[i] += attn_out.d[i];
        layer_norm_forward(x, p[bi.ln2.g], p[bi.ln2.b], bc.ln2);
        const Mat ff_out = ff_forward(bc.ln2.y, p, bi.ff, hp.dropout, rng, bc.ff);
        for (std::size_t i = 0; i < x.size(); ++i) x.d[i] += ff_out.d[i];
    }
    layer_norm_forward(x, p[ids.enc_final.g], p[ids.enc_final.b], cache.enc_final);
    cache.enc_norm = cache.enc_final.y;
    cache.z.assign(hp.d_model, 0.0);
    for (std::size_t i = 0; i < cache.enc_norm.rows; ++i) {
        kernels::axpy(1.0 / static_cast<double>(cache.enc_norm.rows), cache.enc_norm.row(i),
                      cache.z.data(), hp.d_model);
    }
}

void decoder_forward(const ParamStore& p, const AeIds& ids, const Hyperparams& hp, Rng* rng,
                     ForwardCache& cache) {
    cache.mem = Mat(1, hp.d_model);
    std::memcpy(cache.mem.row(0), cache.z.data(), hp.d_model * sizeof(double));
    Mat y = p[ids.dec_query];
    cache.dec.resize(hp.layers);
    for (int l = 0; l < hp.layers; ++l) {
        DecBlockCache& bc = cache.dec[l];
        const DecBlockIds& bi = ids.dec[l];
        layer_norm_forward(y, p[bi.ln1.g], p[bi.ln1.b], bc.ln1);
        const Mat self_out = attention_forward(bc.ln1.y, bc.ln1.y, p, bi.self_attn, hp.heads,
                                               hp.dropout, rng, bc.self_attn);
        for (std::size_t i = 0; i < y.size(); ++i) y.d[i] += self_out.d[i];
        layer_norm_forward(y, p[bi.ln2.g], p[bi.ln2.b], bc.ln2);
        const Mat cross_out = attention_forward(bc.ln2.y, cache.mem, p, bi.cross, hp.heads,
                                                hp.dropout, rng, bc.cross);
        for (std::size_t i = 0; i < y.size(); ++i) y.d[i] += cross_out.d[i];
        layer_norm_forward(y, p[bi.ln3.g], p[bi.ln3.b], bc.ln3);
        const Mat ff_out = ff_forward(bc.ln3.y, p, bi.ff, hp.dropout, rng, bc.ff);
        for (std::size_t i = 0; i < y.size(); ++i) y.d[i] += ff_out.d[i];
    }
    layer_norm_forward(y, p[ids.dec_final.g], p[ids.dec_final.b], cache.dec_final);
    cache.dec_norm = cache.dec_final.y;
    linear_forward(cache.dec_norm, p[ids.head_type_w], p[ids.head_type_b], cache.logits.type);
    linear_forward(cache.dec_norm, p[ids.head_param_w], p[ids.head_param_b], cache.logits.param);
}

void forward_pass(const SeqGrid& grid, const ParamStore& p, const AeIds& ids,
                  const Hyperparams& hp, Rng* rng, ForwardCache& cache) {
    if (static_cast<int>(grid.size()) != hp.n_commands)
        throw CadError(ErrorCode::LengthMismatch, "grid rows != n_commands");
    encoder_forward(grid, p, ids, hp, rng, cache);
    decoder_forward(p, ids, hp, rng, cache);
}

void backward_pass(const SeqGrid& grid, const ParamStore& p, const AeIds& ids,
                   const Hyperparams& hp, ForwardCache& cache, const Logits& dlogits, Grads& g) {
    const int d = hp.d_model;

    // heads
    Mat dy(cache.dec_norm.rows, d);
    linear_backward(cache.dec_norm, p[ids.head_type_w], dlogits.type, &dy, g[ids.head_type_w],
                    g[ids.head_type_b]);
    linear_backward(cache.dec_norm, p[ids.head_param_w], dlogits.param, &dy, g[ids.head_param_w],
                    g[ids.head_param_b]);

    // decoder final LN
    Mat dy_stream(cache.dec_final.x.rows, d);
    layer_norm_backward(cache.dec_final, p[ids.dec_final.g], dy, dy_stream, g[ids.dec_final.g],
                        g[ids.dec_final.b]);

    Mat dmem(1, d);
    for (int l = hp.layers - 1; l >= 0; --l) {
        DecBlockCache& bc = cache.dec[l];
        const DecBlockIds& bi = ids.dec[l];
        {
            Mat dn3(dy_stream.rows, d);
            ff_backward(p, bi.ff, bc.ff, dy_stream, g, dn3);
            layer_norm_backward(bc.ln3, p[bi.ln3.g], dn3, dy_stream, g[bi.ln3.g], g[bi.ln3.b]);
        }
        {
            Mat dn2(dy_stream.rows, d);
            attention_backward(bc.ln2.y, cache.mem, p, bi.cross, hp.heads, bc.cross, dy_stream, g,
                               dn2, dmem);
            layer_norm_backward(bc.ln2, p[bi.ln2.g], dn2, dy_stream, g[bi.ln2.g], g[bi.ln2.b]);
        }
        {
            Mat dn1(dy_stream.rows, d);
            attention_backward(bc.ln1.y, bc.ln1.y, p, bi.self_attn, hp.heads, bc.self_attn,
                               dy_stream, g, dn1, dn1);
            layer_norm_backward(bc.ln1, p[bi.ln1.g], dn1, dy_stream, g[bi.ln1.g], g[bi.ln1.b]);
        }
    }
    kernels::axpy(1.0, dy_stream.d.data(), g[ids.dec_query].d.data(), dy_stream.size());

    // latent -> encoder
    std::vector<double> dz(d, 0.0);
    kernels::axpy(1.0, dmem.row(0), dz.data(), d);

    Mat dxn(cache.enc_norm.rows, d);
    for (std::size_t i = 0; i < dxn.rows; ++i) {
        kernels::axpy(1.0 / static_cast<double>(dxn.rows), dz.data(), dxn.row(i), d);
    }
    Mat dx_stream(cache.enc_final.x.rows, d);
    layer_norm_backward(cache.enc_final, p[ids.enc_final.g], dxn, dx_stream, g[ids.enc_final.g],
                        g[ids.enc_final.b]);

    for (int l = hp.layers - 1; l >= 0; --l) {
        EncBlockCache& bc = cache.enc[l];
        const EncBlockIds& bi = ids.enc[l];
        {
            Mat dn2(dx_stream.rows, d);
            ff_backward(p, bi.ff, bc.ff, dx_stream, g, dn2);
            layer_norm_backward(bc.ln2, p[bi.ln2.g], dn2, dx_stream, g[bi.ln2.g], g[bi.ln2.b]);
        }
        {
            Mat dn1(dx_stream.rows, d);
            attention_backward(bc.ln1.y, bc.ln1.y, p, bi.attn, hp.heads, bc.attn, dx_stream, g,
                               dn1, dn1);
            layer_norm_backward(bc.ln1, p[bi.ln1.g], dn1, dx_stream, g[bi.ln1.g], g[bi.ln1.b]);
        }
    }
    embed_backward(grid, p, ids, hp, cache, dx_stream, g);
}

}  // namespace

// --- loss -----------------------------------------------------------------------

LossParts compute_loss(const Logits& logits, const SeqGrid& truth, double beta,
                       const Hyperparams& hp, Logits* dlogits) {
    const int n = hp.n_commands;
    const int types = hp.n_cmd_types;
    const int levels = hp.n_levels;
    if (static_cast<int>(truth.size()) != n ||
        logits.type.rows != static_cast<std::size_t>(n) ||
        logits.type.cols != static_cast<std::size_t>(types) ||
        logits.param.rows != static_cast<std::size_t>(n) ||
        logits.param.cols != static_cast<std::size_t>(hp.n_param_slots) * levels)
        throw CadError(ErrorCode::ShapeMismatch, "loss shapes");

    if (dlogits) {
        dlogits->type = Mat(n, types);
        dlogits->param = Mat(n, static_cast<std::size_t>(hp.n_param_slots) * levels);
    }
    LossParts parts;

    std::vector<double> prob;
    const auto cross_entropy = [&](const double* z, int len, int target, double* dz,
                                   double weight) {
        double mx = z[0];
        for (int j = 1; j < len; ++j) mx = std::max(mx, z[j]);
        double sum = 0.0;
        prob.assign(len, 0.0);
        for (int j = 0; j < len; ++j) {
            prob[j] = std::exp(z[j] - mx);
            sum += prob[j];
        }
        const double log_sum = std::log(sum) + mx;
        if (dz) {
            for (int j = 0; j < len; ++j) dz[j] = weight * (prob[j] / sum);
            dz[target] -= weight;
        }
        return log_sum - z[target];
    };

    for (int i = 0; i < n; ++i) {
        const int type = truth[i][0];
        if (type < 0 || type >= types)
            throw CadError(ErrorCode::BadLevel, "truth type out of range", type);
        parts.type_sum += cross_entropy(logits.type.row(i), types, type,
                                        dlogits ? dlogits->type.row(i) : nullptr, 1.0);
        const CommandKind kind = static_cast<CommandKind>(type);
        if (kind == CommandKind::Eos) continue;
        for (int s = 0; s < hp.n_param_slots; ++s) {
            if (!slot_used(kind, s)) continue;
            const int target = truth[i][s + 1];
            if (target < 0 || target >= levels - 1)
                throw CadError(ErrorCode::BadLevel, "truth level out of range", target);
            const double* z = logits.param.row(i) + static_cast<std::size_t>(s) * levels;
            double* dz =
                dlogits ? dlogits->param.row(i) + static_cast<std::size_t>(s) * levels : nullptr;
            parts.param_sum += cross_entropy(z, levels, target, dz, beta);
        }
    }
    parts.total = parts.type_sum + beta * parts.param_sum;
    return parts;
}

SeqGrid logits_to_grid(const Logits& logits, const Hyperparams& hp) {
    SeqGrid grid(hp.n_commands);
    for (int i = 0; i < hp.n_commands; ++i) {
        const double* t = logits.type.row(i);
        int type = 0;
        for (int j = 1; j < hp.n_cmd_types; ++j) {
            if (t[j] > t[type]) type = j;
        }
        grid[i][0] = type;
        const CommandKind kind = static_cast<CommandKind>(type);
        for (int s = 0; s < hp.n_param_slots; ++s) {
            if (!slot_used(kind, s)) {
                grid[i][s + 1] = -1;
                continue;
            }
            const double* z = logits.param.row(i) + static_cast<std::size_t>(s) * hp.n_levels;
            int best = 0;  // UNUSED class (last index) is never selected
            for (int j = 1; j < hp.n_levels - 1; ++j) {
                if (z[j] > z[best]) best = j;
            }
            grid[i][s + 1] = best;
        }
    }
    return grid;
}

// --- Autoencoder ------------------------------------------------------------------

double lr_at_step(const Hyperparams& hp, uint64_t step) {
    const double warm =
        std::min(1.0, static_cast<double>(step) / static_cast<double>(hp.warmup_steps));
    return hp.lr * warm;
}

Autoencoder::Autoencoder(const Hyperparams& hp, uint64_t seed) : hp_(hp), rng_(Rng::mix(seed, 1)) {
    hp_.check();
    Rng init_rng(Rng::mix(seed, 0));
    ids_ = std::make_shared<AeIds>(build_layout(params_, hp_));
    init_params(params_, init_rng);
}

std::vector<double> Autoencoder::embed(const GridRow& row, int index) const {
    SeqGrid grid(hp_.n_commands);
    for (auto& r : grid) {
        r.fill(-1);
        r[0] = static_cast<int>(CommandKind::Eos);
    }
    if (index < 0 || index >= hp_.n_commands)
        throw CadError(ErrorCode::OutOfRange, "embed index", index);
    grid[index] = row;
    ForwardCache cache;
    embed_forward(grid, params_, *ids_, hp_, cache);
    std::vector<double> e(hp_.d_model);
    std::memcpy(e.data(), cache.x0.row(index), hp_.d_model * sizeof(double));
    return e;
}

std::vector<double> Autoencoder::encode(const SeqGrid& grid) const {
    ForwardCache cache;
    if (static_cast<int>(grid.size()) != hp_.n_commands)
        throw CadError(ErrorCode::LengthMismatch, "grid rows != n_commands");
    encoder_forward(grid, params_, *ids_, hp_, nullptr, cache);
    for (double v : cache.z) {
        if (!std::isfinite(v)) throw CadError(ErrorCode::NonFinite, "latent vector");
    }
    return cache.z;
}

std::vector<double> Autoencoder::encode_traced(const SeqGrid& grid,
                                               std::vector<Mat>& attn_probs) const {
    ForwardCache cache;
    if (static_cast<int>(grid.size()) != hp_.n_commands)
        throw CadError(ErrorCode::LengthMismatch, "grid rows != n_commands");
    encoder_forward(grid, params_, *ids_, hp_, nullptr, cache);
    attn_probs.clear();
    for (const EncBlockCache& bc : cache.enc) {
        for (const Mat& p : bc.attn.probs) attn_probs.push_back(p);
    }
    return cache.z;
}

Logits Autoencoder::decode(const std::vector<double>& z) const {
    if (static_cast<int>(z.size()) != hp_.d_model)
        throw CadError(ErrorCode::ShapeMismatch, "latent size != d_model");
    for (double v : z) {
        if (!std::isfinite(v)) throw CadError(ErrorCode::NonFinite, "latent vector");
    }
    ForwardCache cache;
    cache.z = z;
    decoder_forward(params_, *ids_, hp_, nullptr, cache);
    if (!all_finite(cache.logits.type) || !all_finite(cache.logits.param))
        throw CadError(ErrorCode::NonFinite, "decoder logits");
    return cache.logits;
}

SeqGrid Autoencoder::predict(const SeqGrid& grid) const {
    return logits_to_grid(decode(encode(grid)), hp_);
}

SeqGrid Autoencoder::predict_from_latent(const std::vector<double>& z) const {
    return logits_to_grid(decode(z), hp_);
}

LossParts Autoencoder::loss_eval(const SeqGrid& grid) const {
    ForwardCache cache;
    forward_pass(grid, params_, *ids_, hp_, nullptr, cache);
    return compute_loss(cache.logits, grid, hp_.beta, hp_);
}

StepStats Autoencoder::train_step(const std::vector<SeqGrid>& batch) {
    if (batch.empty()) throw CadError(ErrorCode::EmptyInput, "empty training batch");
    Grads grads = make_grads(params_);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    StepStats stats;

    for (const SeqGrid& grid : batch) {
        ForwardCache cache;
        forward_pass(grid, params_, *ids_, hp_, hp_.dropout > 0.0 ? &rng_ : nullptr, cache);
        Logits dlogits;
        const LossParts parts = compute_loss(cache.logits, grid, hp_.beta, hp_, &dlogits);
        if (!std::isfinite(parts.total))
            throw CadError(ErrorCode::NonFinite, "loss diverged at step " +
                                                     std::to_string(step_ + 1));
        for (double& v : dlogits.type.d) v *= inv_b;
        for (double& v : dlogits.param.d) v *= inv_b;
        backward_pass(grid, params_, *ids_, hp_, cache, dlogits, grads);
        stats.loss += parts.total * inv_b;
        stats.loss_type += parts.type_sum * inv_b;
        stats.loss_param += parts.param_sum * inv_b;
    }

    double norm_sq = 0.0;
    for (const Mat& g : grads) norm_sq += kernels::sum_squares(g.d.data(), g.size());
    const double norm = std::sqrt(norm_sq);
    if (!std::isfinite(norm)) {
        for (std::size_t i = 0; i < grads.size(); ++i) {
            if (!all_finite(grads[i]))
                throw CadError(ErrorCode::NonFinite,
                               "gradient of " + params_.entries()[i].name + " diverged");
        }
        throw CadError(ErrorCode::NonFinite, "gradient norm diverged");
    }
    double scale = 1.0;
    if (norm > hp_.clip_norm) scale = hp_.clip_norm / norm;
    if (scale != 1.0) {
        for (Mat& g : grads) {
            for (double& v : g.d) v *= scale;
        }
    }

    ++step_;
    const double lr = lr_at_step(hp_, step_);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(step_)));
    const double bc2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(step_)));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& e = params_.entry(static_cast<int>(i));
        kernels::adam_update(e.value.d.data(), grads[i].d.data(), e.m.d.data(), e.v.d.data(),
                             e.value.size(), lr, beta1, beta2, eps, bc1, bc2);
    }
    stats.lr = lr;
    stats.grad_norm = std::min(norm, hp_.clip_norm);
    return stats;
}

// --- gradient check ----------------------------------------------------------------

double grad_check(const Hyperparams& tiny_hp, uint64_t seed) {
    Hyperparams hp = tiny_hp;
    hp.dropout = 0.0;
    Autoencoder ae(hp, seed);

    Rng rng(Rng::mix(seed, 7));
    SeqGrid grid(hp.n_commands);
    for (int i = 0; i < hp.n_commands; ++i) {
        const int type = rng.uniform_int(0, hp.n_cmd_types - 1);
        grid[i].fill(-1);
        grid[i][0] = type;
        const CommandKind kind = static_cast<CommandKind>(type);
        for (int s = 0; s < kNumParamSlots; ++s) {
            if (slot_used(kind, s)) grid[i][s + 1] = rng.uniform_int(0, hp.n_levels - 2);
        }
    }

    // The index layout depends only on the hyperparameters, so a scratch
    // store reproduces the ids of ae.params().
    ParamStore scratch;
    const AeIds ids = build_layout(scratch, hp);

    Grads grads = make_grads(ae.params());
    {
        ForwardCache cache;
        forward_pass(grid, ae.params(), ids, hp, nullptr, cache);
        Logits dlogits;
        (void)compute_loss(cache.logits, grid, hp.beta, hp, &dlogits);
        backward_pass(grid, ae.params(), ids, hp, cache, dlogits, grads);
    }

    const auto loss_at = [&]() {
        ForwardCache cache;
        forward_pass(grid, ae.params(), ids, hp, nullptr, cache);
        return compute_loss(cache.logits, grid, hp.beta, hp).total;
    };

    const bool verbose = std::getenv("CADSEQ_GRAD_DEBUG") != nullptr;
    const double eps = 1e-4;
    double max_rel = 0.0;
    for (std::size_t t = 0; t < grads.size(); ++t) {
        Mat& value = ae.params()[static_cast<int>(t)];
        double tensor_rel = 0.0;
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double saved = value.d[k];
            value.d[k] = saved + eps;
            const double lp = loss_at();
            value.d[k] = saved - eps;
            const double lm = loss_at();
            value.d[k] = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double analytic = grads[t].d[k];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            tensor_rel = std::max(tensor_rel, std::abs(analytic - numeric) / denom);
        }
        if (verbose)
            std::fprintf(stderr, "grad_check %-20s max_rel %.3e\n",
                         ae.params().entries()[t].name.c_str(), tensor_rel);
        max_rel = std::max(max_rel, tensor_rel);
    }
    return max_rel;
}

// --- checkpoints --------------------------------------------------------------------

void Autoencoder::save(const std::string& path) const {
    std::vector<NamedBlob> blobs;
    Mat meta(1, 15);
    meta.d = {static_cast<double>(hp_.d_model), static_cast<double>(hp_.layers),
              static_cast<double>(hp_.heads), static_cast<double>(hp_.ff_dim), hp_.dropout,
              static_cast<double>(hp_.n_commands), static_cast<double>(hp_.n_cmd_types),
              static_cast<double>(hp_.n_param_slots), static_cast<double>(hp_.n_levels),
              hp_.beta, hp_.lr, static_cast<double>(hp_.warmup_steps), hp_.clip_norm,
              static_cast<double>(hp_.batch), 0.0};
    blobs.push_back({"meta.hyperparams", std::move(meta)});
    Mat step(1, 1);
    step.d[0] = static_cast<double>(step_);
    blobs.push_back({"meta.step", std::move(step)});
    for (const auto& e : params_.entries()) {
        blobs.push_back({e.name, e.value});
        blobs.push_back({e.name + "#m", e.m});
        blobs.push_back({e.name + "#v", e.v});
    }
    write_blobs(path, blobs);
}

Autoencoder Autoencoder::load(const std::string& path) {
    const std::vector<NamedBlob> blobs = read_blobs(path);
    const Mat* meta = find_blob(blobs, "meta.hyperparams");
    const Mat* step = find_blob(blobs, "meta.step");
    if (!meta || meta->size() < 14 || !step)
        throw CadError(ErrorCode::IoError, "checkpoint missing metadata");
    Hyperparams hp;
    hp.d_model = static_cast<int>(meta->d[0]);
    hp.layers = static_cast<int>(meta->d[1]);
    hp.heads = static_cast<int>(meta->d[2]);
    hp.ff_dim = static_cast<int>(meta->d[3]);
    hp.dropout = meta->d[4];
    hp.n_commands = static_cast<int>(meta->d[5]);
    hp.n_cmd_types = static_cast<int>(meta->d[6]);
    hp.n_param_slots = static_cast<int>(meta->d[7]);
    hp.n_levels = static_cast<int>(meta->d[8]);
    hp.beta = meta->d[9];
    hp.lr = meta->d[10];
    hp.warmup_steps = static_cast<int>(meta->d[11]);
    hp.clip_norm = meta->d[12];
    hp.batch = static_cast<int>(meta->d[13]);

    Autoencoder ae(hp, 0);
    ae.step_ = static_cast<uint64_t>(step->d[0]);
    for (auto& e : ae.params_.entries()) {
        const Mat* value = find_blob(blobs, e.name);
        const Mat* m = find_blob(blobs, e.name + "#m");
        const Mat* v = find_blob(blobs, e.name + "#v");
        if (!value || !m || !v)
            throw CadError(ErrorCode::IoError, "checkpoint missing tensor " + e.name);
        check_shape(*value, e.value.rows, e.value.cols, e.name.c_str());
        e.value = *value;
        e.m = *m;
        e.v = *v;
    }
    return ae;
}

}  // namespace cadseq
