// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criterion 8 drives the installed CLI binary end to end;
// its path arrives via CADSEQ_CLI_PATH (compile definition) or argv[1].

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cadseq/autoencoder.hpp"
#include "cadseq/dataops.hpp"
#include "cadseq/geometry.hpp"
#include "cadseq/latentgan.hpp"
#include "cadseq/metrics.hpp"
#include "cadseq/tokenize.hpp"

using namespace cadseq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string g_cli_path;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

#define REQUIRE_TRUE(out, cond, what)                     \
    do {                                                  \
        if (!(cond)) {                                    \
            (out).pass = false;                           \
            (out).detail << " [FAILED: " << what << "]";  \
        }                                                 \
    } while (0)

// --- 1: representation round-trip --------------------------------------------------

Outcome criterion_roundtrip() {
    Outcome out;
    const Corpus corpus = synth_corpus(1000, 20260809);
    const auto t0 = std::chrono::steady_clock::now();
    int exact = 0;
    double worst_slot_error = 0.0;
    bool bounds_ok = true;
    for (const auto& [id, model] : corpus.models) {
        const TokenGrid grid = tokenize(model);
        const CadModel back = detokenize(grid);
        const TokenGrid grid2 = tokenize(back);
        if (grid2.same_cells(grid)) ++exact;

        const CadSequence truth = flatten(model);
        const CadSequence recon = flatten(back);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (truth[i].kind != recon[i].kind) bounds_ok = false;
            for (int s = 0; s < kNumParamSlots; ++s) {
                if (!slot_used(truth[i].kind, s)) continue;
                const auto& r = param_ranges()[s];
                const double err = std::abs(truth[i].p[s] - recon[i].p[s]);
                const double bound = r.discrete ? 0.0 : (r.hi - r.lo) / 510.0 + 1e-12;
                if (err > bound) bounds_ok = false;
                if (!r.discrete) worst_slot_error = std::max(worst_slot_error, err / (r.hi - r.lo));
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.detail << "exact fixed points " << exact << "/1000, worst relative slot error "
               << worst_slot_error << ", round-trip time " << secs << " s";
    REQUIRE_TRUE(out, exact == 1000, "integer fixed point");
    REQUIRE_TRUE(out, bounds_ok, "half-step bound");
    REQUIRE_TRUE(out, secs < 30.0, "runtime < 30 s");
    return out;
}

// --- 2: geometry volume oracle -----------------------------------------------------

Outcome criterion_volumes() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();

    const auto square_profile = [] {
        Loop loop;
        loop.start = {0.0, 0.0};
        loop.curves.push_back(LineCurve{{1.0, 0.0}});
        loop.curves.push_back(LineCurve{{1.0, 1.0}});
        loop.curves.push_back(LineCurve{{0.0, 1.0}});
        loop.curves.push_back(LineCurve{{0.0, 0.0}});
        return Profile{loop};
    };
    CadModel cube;
    {
        SketchExtrudePair pair;
        pair.profile = square_profile();
        pair.extrude.origin = {0.5, 0.5, 0.0};
        pair.extrude.scale = 1.0;
        pair.extrude.e1 = 1.0;
        cube.pairs.push_back(pair);
    }
    CadModel cut = cube;
    {
        SketchExtrudePair inner;
        inner.profile = square_profile();
        inner.extrude.origin = {0.25, 0.25, 0.0};
        inner.extrude.scale = 0.5;
        inner.extrude.e1 = 0.5;
        inner.extrude.op = BooleanOp::Cut;
        cut.pairs.push_back(inner);
    }
    CadModel cylinder;
    {
        SketchExtrudePair pair;
        Loop loop;
        loop.curves.push_back(CircleCurve{{0.5, 0.5}, 0.5});
        loop.start = {0.0, 0.5};
        pair.profile = {loop};
        pair.extrude.origin = {0.0, 0.0, 0.0};
        pair.extrude.scale = 1.0;  // world radius 0.5
        pair.extrude.e1 = 1.0;
        cylinder.pairs.push_back(pair);
    }

    const struct {
        const char* name;
        const CadModel* model;
        double expected;
    } cases[] = {{"cube", &cube, 1.0},
                 {"cube-minus-cube", &cut, 0.875},
                 {"cylinder", &cylinder, kPi / 4.0}};
    for (const auto& c : cases) {
        const VolumeEstimate est = estimate_volume(build_solid(*c.model), 200000, 20240601);
        out.detail << c.name << " " << est.volume << " (expect " << c.expected << ", 3sigma "
                   << 3.0 * est.std_error << "); ";
        // the cube fills its own bounding box: the estimate is exact, sigma 0
        REQUIRE_TRUE(out, std::abs(est.volume - c.expected) <= 3.0 * est.std_error + 1e-9,
                     c.name);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.detail << "time " << secs << " s";
    REQUIRE_TRUE(out, secs < 60.0, "runtime < 60 s");
    return out;
}

// --- 3: arc oracle ------------------------------------------------------------------

Outcome criterion_arcs() {
    Outcome out;
    Rng rng(777);
    double worst_end = 0.0, worst_round = 0.0;
    for (int trial = 0; trial < 100000; ++trial) {
        const Vec2 start{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec2 end{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (dist(start, end) < 1e-3) end.x += 0.25;
        const double sweep = rng.uniform(0.02, 2.0 * kPi - 0.02);
        const bool ccw = rng.chance(0.5);

        const ArcGeometry g = arc_geometry(start, end, sweep, ccw);
        const Vec2 rotated = g.center + rotate(start - g.center, g.signed_sweep);
        worst_end = std::max(worst_end, dist(rotated, end));

        const ArcMidpoint am = arc_to_midpoint(ArcCurve{end, sweep, ccw}, start);
        const ArcCurve back = midpoint_to_arc(start, am.end, am.mid);
        worst_round = std::max({worst_round, std::abs(back.sweep - sweep),
                                dist(back.end, end),
                                back.ccw == ccw ? 0.0 : 1.0});
    }
    out.detail << "worst end reproduction " << worst_end << ", worst midpoint round-trip "
               << worst_round;
    REQUIRE_TRUE(out, worst_end < 1e-9, "rotation reproduces end < 1e-9");
    REQUIRE_TRUE(out, worst_round < 1e-6, "midpoint round-trip < 1e-6");
    return out;
}

// --- 4: metric identities -------------------------------------------------------------

Outcome criterion_metrics() {
    Outcome out;
    Rng rng(31415);
    const auto random_cloud = [&rng](int n) {
        PointCloud c;
        for (int i = 0; i < n; ++i)
            c.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        return c;
    };
    const auto brute = [](const PointCloud& x, const PointCloud& y) {
        const auto side = [](const PointCloud& a, const PointCloud& b) {
            double acc = 0.0;
            for (const Vec3& p : a.points) {
                double best = std::numeric_limits<double>::infinity();
                for (const Vec3& q : b.points) {
                    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
                    const double d = (dx * dx + dy * dy) + dz * dz;
                    if (d < best) best = d;
                }
                acc += best;
            }
            return acc / static_cast<double>(a.points.size());
        };
        return side(x, y) + side(y, x);
    };

    const PointCloud x = random_cloud(150);
    REQUIRE_TRUE(out, chamfer(x, x) == 0.0, "chamfer(X,X) == 0");

    bool exact = true;
    for (int trial = 0; trial < 100; ++trial) {
        const PointCloud a = random_cloud(rng.uniform_int(1, 200));
        const PointCloud b = random_cloud(rng.uniform_int(1, 200));
        if (chamfer(a, b) != brute(a, b)) exact = false;
    }
    REQUIRE_TRUE(out, exact, "accelerated CD == brute force exactly (100 pairs)");

    std::vector<PointCloud> s;
    for (int i = 0; i < 8; ++i) s.push_back(random_cloud(80));
    REQUIRE_TRUE(out, coverage(s, s) == 1.0, "cov(S,S) == 1");
    REQUIRE_TRUE(out, mmd(s, s) == 0.0, "mmd(S,S) == 0");
    REQUIRE_TRUE(out, jsd(s, s) == 0.0, "jsd(S,S) == 0");

    std::vector<PointCloud> g;
    for (int i = 0; i < 8; ++i) g.push_back(random_cloud(80));
    REQUIRE_TRUE(out, std::abs(jsd(s, g) - jsd(g, s)) < 1e-15, "jsd symmetric");
    std::vector<PointCloud> left = {random_cloud(400)};
    std::vector<PointCloud> right = left;
    for (Vec3& p : left[0].points) p.x = -0.5 - 0.4 * std::abs(p.x);
    for (Vec3& p : right[0].points) p.x = 0.5 + 0.4 * std::abs(p.x);
    REQUIRE_TRUE(out, std::abs(jsd(left, right) - std::log(2.0)) < 1e-12,
                 "jsd == ln 2 on disjoint supports");

    // accuracy metrics against hand-counted cases
    TokenGrid truth;
    truth.rows[0][0] = 0;
    truth.rows[1][0] = 1;
    truth.rows[1][1] = 100;
    truth.rows[1][2] = 100;
    truth.rows[2][0] = 4;
    for (int s2 = slot::theta; s2 <= slot::u; ++s2) truth.rows[2][s2 + 1] = 10;
    TokenGrid pred = truth;
    pred.rows[0][0] = 1;
    pred.rows[10][0] = 0;
    pred.rows[59][0] = 0;
    REQUIRE_TRUE(out, std::abs(acc_cmd(truth, pred) - 57.0 / 60.0) < 1e-15,
                 "acc_cmd == 57/60 hand count");
    TokenGrid pred2 = truth;
    pred2.rows[2][0] = 5;       // hide the extrude row
    pred2.rows[1][1] = 102;     // |2| < 3 passes
    pred2.rows[1][2] = 105;     // |5| >= 3 fails
    const ParamAccuracy pa = acc_param(truth, pred2, 3);
    REQUIRE_TRUE(out, std::abs(pa.value - 0.5) < 1e-15, "acc_param == 1/2 hand count");
    out.detail << "all identities hold";
    return out;
}

// --- 5: differentiability ---------------------------------------------------------------

Outcome criterion_gradients() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const double err = grad_check(Hyperparams::tiny(), 20260809);
    out.detail << "max relative gradient error " << err;
    REQUIRE_TRUE(out, err < 1e-3, "grad check < 1e-3");

    // masked parameter slots receive exactly zero gradient
    Hyperparams hp = Hyperparams::tiny();
    Rng rng(5);
    SeqGrid grid(hp.n_commands);
    for (int i = 0; i < hp.n_commands; ++i) {
        grid[i].fill(-1);
        grid[i][0] = rng.uniform_int(0, hp.n_cmd_types - 1);
        const CommandKind kind = static_cast<CommandKind>(grid[i][0]);
        for (int s = 0; s < kNumParamSlots; ++s) {
            if (slot_used(kind, s)) grid[i][s + 1] = rng.uniform_int(0, hp.n_levels - 2);
        }
    }
    Logits logits;
    logits.type = Mat(hp.n_commands, hp.n_cmd_types);
    logits.param = Mat(hp.n_commands, static_cast<std::size_t>(16) * hp.n_levels);
    for (double& v : logits.param.d) v = rng.uniform(-1, 1);
    Logits dlogits;
    (void)compute_loss(logits, grid, hp.beta, hp, &dlogits);
    bool masked_zero = true;
    for (int i = 0; i < hp.n_commands; ++i) {
        const CommandKind kind = static_cast<CommandKind>(grid[i][0]);
        for (int s = 0; s < 16; ++s) {
            if (kind != CommandKind::Eos && slot_used(kind, s)) continue;
            for (int l = 0; l < hp.n_levels; ++l) {
                if (dlogits.param.at(i, static_cast<std::size_t>(s) * hp.n_levels + l) != 0.0)
                    masked_zero = false;
            }
        }
    }
    REQUIRE_TRUE(out, masked_zero, "masked slots get exactly zero gradient");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.detail << ", time " << secs << " s";
    REQUIRE_TRUE(out, secs < 60.0, "runtime < 60 s");
    return out;
}

// --- 6: overfit gate -----------------------------------------------------------------------

Outcome criterion_overfit() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const Corpus corpus = synth_corpus(64, 42);
    std::vector<TokenGrid> grids;
    std::vector<SeqGrid> seqs;
    for (const auto& [id, model] : corpus.models) {
        grids.push_back(tokenize(model));
        seqs.push_back(to_seq_grid(grids.back()));
    }

    const Hyperparams hp = Hyperparams::desk();
    Autoencoder ae(hp, 1);
    Rng batch_rng(Rng::mix(1, 99));
    int reached_step = -1;
    double final_cmd = 0.0, final_param = 0.0;
    for (int step = 1; step <= 3000; ++step) {
        std::vector<SeqGrid> batch;
        for (int b = 0; b < hp.batch; ++b) batch.push_back(seqs[batch_rng.below(seqs.size())]);
        (void)ae.train_step(batch);
        if (step % 50 == 0) {
            double acc_c = 0.0, acc_p = 0.0;
            for (std::size_t i = 0; i < grids.size(); ++i) {
                const TokenGrid pred = to_token_grid(ae.predict(seqs[i]));
                acc_c += acc_cmd(grids[i], pred);
                acc_p += acc_param(grids[i], pred, 3).value;
            }
            acc_c /= static_cast<double>(grids.size());
            acc_p /= static_cast<double>(grids.size());
            final_cmd = acc_c;
            final_param = acc_p;
            if (acc_c >= 0.99 && acc_p >= 0.90) {
                reached_step = step;
                break;
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.detail << "ACC_cmd " << final_cmd << ", ACC_param " << final_param << " at step "
               << (reached_step > 0 ? reached_step : 3000) << ", " << secs << " s";
    REQUIRE_TRUE(out, reached_step > 0, "targets reached within 3000 steps");
    REQUIRE_TRUE(out, secs < 900.0, "runtime < 15 min");
    return out;
}

// --- 7: GAN math ------------------------------------------------------------------------------

Outcome criterion_gan() {
    Outcome out;
    Rng rng(5);
    const auto gaussian = [&rng](int rows, int cols) {
        Mat m(rows, cols);
        for (double& v : m.d) v = rng.normal();
        return m;
    };
    const auto linear_critic = [](const std::vector<double>& w) {
        Rng r0(0);
        Mlp mlp(static_cast<int>(w.size()), 1, 0, 1, r0);
        for (std::size_t i = 0; i < w.size(); ++i) mlp.w[0].at(i, 0) = w[i];
        mlp.b[0].at(0, 0) = 0.1;
        return mlp;
    };
    const Mat real = gaussian(16, 3);
    const Mat fake = gaussian(16, 3);
    std::vector<double> eps(16);
    for (double& e : eps) e = rng.uniform();
    const double gp1 = gradient_penalty(linear_critic({1, 0, 0}), real, fake, eps);
    const double gp3 = gradient_penalty(linear_critic({3, 0, 0}), real, fake, eps);
    out.detail << "GP(|w|=1) = " << gp1 << ", GP(|w|=3) = " << gp3;
    REQUIRE_TRUE(out, std::abs(gp1) < 1e-12, "GP of unit-gradient critic is 0");
    REQUIRE_TRUE(out, std::abs(gp3 - 4.0) < 1e-12, "GP of norm-3 critic is 4");

    // 5:1 update ratio and shrinking critic gap on Gaussian-mixture latents
    GanConfig cfg = GanConfig::desk(64);
    LatentGan gan(cfg, 11);
    Rng mix_rng(Rng::mix(11, 55));
    std::vector<std::vector<double>> centers(4, std::vector<double>(64));
    for (auto& c : centers) {
        for (double& v : c) v = mix_rng.uniform(-2.0, 2.0);
    }
    std::vector<double> gaps;
    for (int it = 0; it < 2000; ++it) {
        Mat realb(cfg.batch, 64);
        for (int b = 0; b < cfg.batch; ++b) {
            const auto& c = centers[mix_rng.below(4)];
            for (int j = 0; j < 64; ++j) realb.at(b, j) = c[j] + 0.3 * mix_rng.normal();
        }
        gaps.push_back(std::abs(gan.train_step(realb).critic_gap));
    }
    REQUIRE_TRUE(out, gan.critic_updates() == 5 * gan.step(), "critic:generator updates 5:1");
    const auto window = [&gaps](int lo, int hi) {
        double acc = 0.0;
        for (int i = lo; i < hi; ++i) acc += gaps[i];
        return acc / (hi - lo);
    };
    const double early = window(0, 200);
    const double late = window(1800, 2000);
    out.detail << "; |gap| " << early << " -> " << late;
    REQUIRE_TRUE(out, late < 0.75 * early, "smoothed critic gap shrinks");
    return out;
}

// --- 8: end-to-end determinism over the CLI ----------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd =
        g_cli_path + " " + args + " 2>>acceptance_e2e/cli.log";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    }
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) {
        why = "file lists differ";
        return false;
    }
    for (const auto& rel : fa) {
        if (slurp(a / rel) != slurp(b / rel)) {
            why = "content differs: " + rel.string();
            return false;
        }
    }
    return true;
}

Outcome criterion_e2e() {
    Outcome out;
    if (g_cli_path.empty() || !fs::exists(g_cli_path)) {
        out.pass = false;
        out.detail << "CLI binary not found at '" << g_cli_path << "'";
        return out;
    }
    const fs::path work = fs::path("acceptance_e2e");
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string w = work.string();

    REQUIRE_TRUE(out, run_cli("synth --n 20 --seed 5 --out " + w + "/corpus") == 0, "synth");
    REQUIRE_TRUE(out,
                 run_cli("train --corpus " + w + "/corpus --out " + w +
                         "/ae --desk --steps 30 --seed 2 --eval-every 0") == 0,
                 "train");
    REQUIRE_TRUE(out,
                 run_cli("gan-train --out " + w +
                         "/gan --synthetic-latents --latent-dim 64 --desk --iters 40 "
                         "--seed 3") == 0,
                 "gan-train");
    REQUIRE_TRUE(out,
                 run_cli("encode --corpus " + w + "/corpus --ae " + w + "/ae/ae.ckpt --out " +
                         w + "/latents.bin") == 0,
                 "encode");

    // generate twice with one seed: byte-identical artifacts
    REQUIRE_TRUE(out,
                 run_cli("generate --n 10 --seed 1 --ae " + w + "/ae/ae.ckpt --gan " + w +
                         "/gan/gan.ckpt --out " + w + "/gen1 --points 256") == 0,
                 "generate #1");
    REQUIRE_TRUE(out,
                 run_cli("generate --n 10 --seed 1 --ae " + w + "/ae/ae.ckpt --gan " + w +
                         "/gan/gan.ckpt --out " + w + "/gen2 --points 256") == 0,
                 "generate #2");
    std::string why;
    REQUIRE_TRUE(out, dirs_identical(work / "gen1", work / "gen2", why),
                 "byte-identical generate outputs (" + why + ")");

    // self-evaluation: ae mode and gen mode
    REQUIRE_TRUE(out,
                 run_cli("eval --mode ae --truth " + w + "/corpus --pred " + w +
                         "/corpus --points 400 --jobs 2 --out " + w + "/ae_report.json") == 0,
                 "eval ae");
    REQUIRE_TRUE(out,
                 run_cli("eval --mode gen --ref " + w + "/corpus --gen " + w +
                         "/corpus --points 300 --repeats 2 --jobs 2 --out " + w +
                         "/gen_report.json") == 0,
                 "eval gen");
    try {
        const json ae_report = json::parse(slurp(work / "ae_report.json"));
        const json gen_report = json::parse(slurp(work / "gen_report.json"));
        out.detail << "self-eval acc_cmd " << ae_report["acc_cmd"] << ", acc_param "
                   << ae_report["acc_param"] << ", median CD " << ae_report["cd"]["median"]
                   << ", cov " << gen_report["cov"] << ", mmd " << gen_report["mmd"];
        REQUIRE_TRUE(out, ae_report["acc_cmd"].get<double>() == 1.0, "acc_cmd == 1.0");
        REQUIRE_TRUE(out, ae_report["acc_param"].get<double>() == 1.0, "acc_param == 1.0");
        REQUIRE_TRUE(out, ae_report["cd"]["median"].get<double>() < 1e-4,
                     "median CD < 1e-4 with shared seed");
        REQUIRE_TRUE(out, gen_report["cov"].get<double>() == 1.0, "cov == 1.0");
        REQUIRE_TRUE(out, gen_report["mmd"].get<double>() == 0.0, "mmd == 0.0");
    } catch (const json::exception& e) {
        out.pass = false;
        out.detail << " report parse failure: " << e.what();
    }
    if (out.pass) fs::remove_all(work);
    return out;
}

// --- 9: invalid-ratio plumbing ------------------------------------------------------------------

Outcome criterion_invalid_ratio() {
    Outcome out;
    const Corpus corpus = synth_corpus(49, 6);
    std::vector<CadModel> models;
    for (const auto& [id, m] : corpus.models) models.push_back(m);
    // one deliberately broken model: zero-radius circle
    CadModel broken = models[0];
    broken.pairs[0].profile[0].curves[0] = CircleCurve{{0.5, 0.5}, 0.0};
    models.push_back(broken);
    const double ratio = invalid_ratio(models, 512, 99);
    out.detail << "invalid ratio " << ratio << " over " << models.size() << " models";
    REQUIRE_TRUE(out, ratio == 0.02, "ratio == 0.02 exactly");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef CADSEQ_CLI_PATH
    g_cli_path = CADSEQ_CLI_PATH;
#endif
    if (argc > 1) g_cli_path = argv[1];

    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1 representation round-trip", criterion_roundtrip},
        {"2 geometry volume oracle", criterion_volumes},
        {"3 arc oracle", criterion_arcs},
        {"4 metric identities", criterion_metrics},
        {"5 differentiability", criterion_gradients},
        {"6 overfit gate", criterion_overfit},
        {"7 gan math", criterion_gan},
        {"8 end-to-end determinism", criterion_e2e},
        {"9 invalid-ratio plumbing", criterion_invalid_ratio},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (out.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << secs
                  << " s): " << out.detail.str() << "\n"
                  << std::flush;
        if (!out.pass) ++failures;
    }
    std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                                : "ACCEPTANCE: " + std::to_string(failures) + " criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
