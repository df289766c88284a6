#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cadseq/rng.hpp"
#include "cadseq/tensor.hpp"
#include "cadseq/tokenize.hpp"

namespace cadseq {

struct AeIds;  // internal parameter-index layout

// Paper-scale defaults; desk() shrinks width/depth to laptop budgets.
struct Hyperparams {
    int d_model = 256;
    int layers = 4;
    int heads = 8;
    int ff_dim = 512;
    double dropout = 0.1;
    int n_commands = kMaxCommands;
    int n_cmd_types = kNumCommandKinds;
    int n_param_slots = kNumParamSlots;
    int n_levels = 257;  // 256 quantization levels + one UNUSED class
    double beta = 2.0;   // weight of the parameter loss term
    double lr = 1e-3;
    int warmup_steps = 2000;
    double clip_norm = 1.0;
    int batch = 512;

    static Hyperparams paper() { return {}; }

    static Hyperparams desk() {
        Hyperparams hp;
        hp.d_model = 64;
        hp.layers = 2;
        hp.heads = 4;
        hp.ff_dim = 128;
        hp.batch = 32;
        hp.warmup_steps = 200;
        return hp;
    }

    // finite-difference verification scale
    static Hyperparams tiny() {
        Hyperparams hp;
        hp.d_model = 8;
        hp.layers = 1;
        hp.heads = 2;
        hp.ff_dim = 16;
        hp.n_commands = 6;
        hp.n_levels = 9;
        hp.dropout = 0.0;
        hp.batch = 1;
        return hp;
    }

    void check() const {
        if (d_model <= 0 || layers <= 0 || heads <= 0 || ff_dim <= 0 || n_commands <= 0 ||
            n_levels < 2 || batch <= 0 || warmup_steps <= 0)
            throw CadError(ErrorCode::BadConfig, "non-positive hyperparameter");
        if (d_model % heads != 0)
            throw CadError(ErrorCode::BadConfig, "d_model must be divisible by heads");
    }
};

// One command row: [type, 16 slot levels]; -1 marks unused slots. Sequences
// shorter than kMaxCommands exist only in reduced test configurations.
using GridRow = std::array<int, kNumParamSlots + 1>;
using SeqGrid = std::vector<GridRow>;

SeqGrid to_seq_grid(const TokenGrid& grid);
TokenGrid to_token_grid(const SeqGrid& grid);  // requires length kMaxCommands

struct Logits {
    Mat type;   // Nc x n_cmd_types
    Mat param;  // Nc x (n_param_slots * n_levels)
};

struct LossParts {
    double total = 0.0;
    double type_sum = 0.0;   // summed over positions (Eq. style), then batch-averaged
    double param_sum = 0.0;  // unweighted parameter term; total = type + beta * param
};

// Sums of cross-entropies per the training objective; parameter terms only
// over slots used by the ground-truth command at non-EOS positions. When
// `dlogits` is given it receives d(total)/d(logits), zero at masked cells.
LossParts compute_loss(const Logits& logits, const SeqGrid& truth, double beta,
                       const Hyperparams& hp, Logits* dlogits = nullptr);

// Named learnable tensors with Adam moments, in fixed registration order.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Mat value;
        Mat m, v;  // Adam first/second moments
    };

    int add(const std::string& name, std::size_t rows, std::size_t cols);
    Mat& operator[](int id) { return entries_[id].value; }
    const Mat& operator[](int id) const { return entries_[id].value; }
    Entry& entry(int id) { return entries_[id]; }
    const std::vector<Entry>& entries() const { return entries_; }
    std::vector<Entry>& entries() { return entries_; }
    int find(const std::string& name) const;  // -1 if absent
    std::size_t total_params() const;

private:
    std::vector<Entry> entries_;
};

struct StepStats {
    double loss = 0.0;
    double loss_type = 0.0;
    double loss_param = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0;  // after clipping
};

double lr_at_step(const Hyperparams& hp, uint64_t step);

class Autoencoder {
public:
    Autoencoder(const Hyperparams& hp, uint64_t seed);

    const Hyperparams& hp() const { return hp_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    uint64_t step() const { return step_; }

    // e(C_i) = e_cmd + e_param + e_pos for one command row
    std::vector<double> embed(const GridRow& row, int index) const;

    std::vector<double> encode(const SeqGrid& grid) const;
    // encode while collecting every encoder attention matrix (layers x heads)
    std::vector<double> encode_traced(const SeqGrid& grid, std::vector<Mat>& attn_probs) const;
    Logits decode(const std::vector<double>& z) const;
    SeqGrid predict(const SeqGrid& grid) const;
    SeqGrid predict_from_latent(const std::vector<double>& z) const;

    // Forward + backward + clip + Adam over one batch; deterministic for a
    // fixed construction seed and call sequence.
    StepStats train_step(const std::vector<SeqGrid>& batch);

    LossParts loss_eval(const SeqGrid& grid) const;  // no dropout, no gradients

    void save(const std::string& path) const;
    static Autoencoder load(const std::string& path);

private:
    Hyperparams hp_;
    ParamStore params_;
    std::shared_ptr<const AeIds> ids_;
    uint64_t step_ = 0;
    Rng rng_;  // dropout stream
};

// Analytic vs central finite-difference gradients over every parameter
// tensor; returns the max relative error. Dropout must be disabled.
double grad_check(const Hyperparams& tiny_hp, uint64_t seed);

// Argmax readout: slot usage comes from the predicted type's mask, never
// from the UNUSED logit.
SeqGrid logits_to_grid(const Logits& logits, const Hyperparams& hp);

}  // namespace cadseq
