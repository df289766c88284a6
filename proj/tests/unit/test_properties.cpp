// Cross-module property tests.

#include <cmath>

#include "cadseq/autoencoder.hpp"
#include "cadseq/dataops.hpp"
#include "cadseq/geometry.hpp"
#include "doctest.h"

using namespace cadseq;

TEST_CASE("encoder attention rows sum to 1 at every layer") {
    Hyperparams hp = Hyperparams::tiny();
    hp.n_commands = kMaxCommands;
    hp.n_levels = 257;
    hp.layers = 2;
    Autoencoder ae(hp, 12);
    const Corpus corpus = synth_corpus(2, 3);
    const SeqGrid grid = to_seq_grid(tokenize(corpus.models[0].second));

    std::vector<Mat> probs;
    (void)ae.encode_traced(grid, probs);
    CHECK(probs.size() == static_cast<std::size_t>(hp.layers * hp.heads));
    for (const Mat& p : probs) {
        CHECK(p.rows == static_cast<std::size_t>(hp.n_commands));
        for (std::size_t i = 0; i < p.rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < p.cols; ++j) sum += p.at(i, j);
            CHECK(std::abs(sum - 1.0) < 1e-6);
        }
    }
}

TEST_CASE("zeroed residual blocks pass embeddings through to the pooled latent") {
    Hyperparams hp = Hyperparams::tiny();
    Autoencoder ae(hp, 21);
    // zero every encoder/decoder block tensor; keep embeddings and final LN
    for (auto& e : ae.params().entries()) {
        const bool block = e.name.rfind("enc0", 0) == 0 || e.name.rfind("dec0", 0) == 0;
        if (block) e.value.zero();
        if (e.name == "enc.final_ln.g") std::fill(e.value.d.begin(), e.value.d.end(), 1.0);
        if (e.name == "enc.final_ln.b") e.value.zero();
    }

    SeqGrid grid(hp.n_commands);
    Rng rng(5);
    for (int i = 0; i < hp.n_commands; ++i) {
        grid[i].fill(-1);
        grid[i][0] = rng.uniform_int(0, hp.n_cmd_types - 1);
        const CommandKind kind = static_cast<CommandKind>(grid[i][0]);
        for (int s = 0; s < kNumParamSlots; ++s) {
            if (slot_used(kind, s)) grid[i][s + 1] = rng.uniform_int(0, hp.n_levels - 2);
        }
    }

    // hand-computed reference: z = mean_i layer_norm(embed(row_i, i))
    std::vector<double> expected(hp.d_model, 0.0);
    for (int i = 0; i < hp.n_commands; ++i) {
        const std::vector<double> e = ae.embed(grid[i], i);
        double mean = 0.0;
        for (double v : e) mean += v;
        mean /= hp.d_model;
        double var = 0.0;
        for (double v : e) var += (v - mean) * (v - mean);
        var /= hp.d_model;
        const double rstd = 1.0 / std::sqrt(var + 1e-5);
        for (int j = 0; j < hp.d_model; ++j)
            expected[j] += (e[j] - mean) * rstd / hp.n_commands;
    }
    const std::vector<double> z = ae.encode(grid);
    for (int j = 0; j < hp.d_model; ++j)
        CHECK(z[j] == doctest::Approx(expected[j]).epsilon(1e-12));
}

TEST_CASE("usage mask holds for every emitted command over random models") {
    const Corpus corpus = synth_corpus(12, 29);
    for (const auto& [id, model] : corpus.models) {
        const TokenGrid grid = tokenize(model);
        for (const auto& row : grid.rows) {
            const CommandKind kind = command_kind_from_code(row[0]);
            for (int s = 0; s < kNumParamSlots; ++s) {
                if (slot_used(kind, s)) {
                    CHECK(row[s + 1] >= 0);
                } else {
                    CHECK(row[s + 1] == -1);
                }
            }
        }
        // continuous form too
        for (const CadCommand& cmd : flatten(model).cmds) {
            for (int s = 0; s < kNumParamSlots; ++s) {
                if (!slot_used(cmd.kind, s)) CHECK(cmd.p[s] == kUnusedParam);
            }
        }
    }
}

TEST_CASE("profile normalization preserves pairwise distance ratios") {
    const Corpus corpus = synth_corpus(8, 61);
    for (const auto& [id, model] : corpus.models) {
        // denormalize a copy by hand to get a non-trivial input
        Profile raw = model.pairs[0].profile;
        const auto stretch = [](Vec2 p) { return Vec2{p.x * 3.7 + 1.2, p.y * 3.7 - 0.4}; };
        for (Loop& loop : raw) {
            loop.start = stretch(loop.start);
            for (Curve& c : loop.curves) {
                if (auto* line = std::get_if<LineCurve>(&c)) line->end = stretch(line->end);
                else if (auto* arc = std::get_if<ArcCurve>(&c)) arc->end = stretch(arc->end);
                else {
                    auto& circle = std::get<CircleCurve>(c);
                    circle.center = stretch(circle.center);
                    circle.radius *= 3.7;
                }
            }
        }
        const auto [normalized, s] = normalize_profile(raw);
        const Ring before = tessellate_loop(raw[0]);
        const Ring after = tessellate_loop(normalized[0]);
        REQUIRE(before.pts.size() == after.pts.size());
        const double ref =
            dist(before.pts[0], before.pts[before.pts.size() / 2]) /
            dist(after.pts[0], after.pts[after.pts.size() / 2]);
        for (std::size_t i = 1; i + 1 < before.pts.size(); i += 7) {
            const double d_before = dist(before.pts[0], before.pts[i]);
            const double d_after = dist(after.pts[0], after.pts[i]);
            if (d_after < 1e-9) continue;
            CHECK(d_before / d_after == doctest::Approx(ref).epsilon(1e-9));
        }
    }
}

TEST_CASE("join order over three bodies does not change membership") {
    const auto square_profile = [] {
        Loop loop;
        loop.start = {0.0, 0.0};
        loop.curves.push_back(LineCurve{{1.0, 0.0}});
        loop.curves.push_back(LineCurve{{1.0, 1.0}});
        loop.curves.push_back(LineCurve{{0.0, 1.0}});
        loop.curves.push_back(LineCurve{{0.0, 0.0}});
        return Profile{loop};
    };
    const auto body_at = [&](Vec3 origin, double size) {
        SketchExtrudePair pair;
        pair.profile = square_profile();
        pair.extrude.origin = origin;
        pair.extrude.scale = size;
        pair.extrude.e1 = size;
        pair.extrude.op = BooleanOp::Join;
        return pair;
    };
    CadModel abc;
    abc.pairs = {body_at({0, 0, 0}, 1.0), body_at({0.5, 0.2, 0.3}, 0.8),
                 body_at({-0.3, 0.4, 0.1}, 0.6)};
    abc.pairs[0].extrude.op = BooleanOp::NewBody;
    CadModel cba = abc;
    std::swap(cba.pairs[0], cba.pairs[2]);
    cba.pairs[0].extrude.op = BooleanOp::NewBody;
    cba.pairs[2].extrude.op = BooleanOp::Join;
    const Solid s1 = build_solid(abc);
    const Solid s2 = build_solid(cba);
    Rng rng(17);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 q{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        CHECK(membership(s1, q) == membership(s2, q));
    }
}
