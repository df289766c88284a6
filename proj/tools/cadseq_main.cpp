// cadseq: batch CLI over the CAD command-sequence kernel and the desk-scale
// learning stack.
//
// Exit codes: 0 success, 1 I/O / grammar / config error, 2 invalid model.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cadseq/autoencoder.hpp"
#include "cadseq/checkpoint.hpp"
#include "cadseq/dataops.hpp"
#include "cadseq/geometry.hpp"
#include "cadseq/latentgan.hpp"
#include "cadseq/metrics.hpp"
#include "cadseq/tokenize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cadseq;

namespace {

int log_level() {
    const char* env = std::getenv("CADSEQ_LOG_LEVEL");
    return env ? std::atoi(env) : 1;
}

void echo_config(const std::string& command, const json& cfg) {
    if (log_level() <= 0) return;
    json j = cfg;
    j["command"] = command;
    std::cerr << "config: " << j.dump() << "\n";
}

// temp-file-plus-rename keeps partially written artifacts invisible
void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw CadError(ErrorCode::IoError, "cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CadError(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// bounded deterministic fan-out: results land at their own index
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(jobs, count);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

uint64_t id_seed(const std::string& id, uint64_t base) {
    uint64_t h = 1469598103934665603ULL ^ base;
    for (const char c : id) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// --- validate-render ---------------------------------------------------------------

int cmd_validate_render(const std::string& input, const std::string& out_mesh,
                        const std::string& out_cloud, int points, uint64_t seed) {
    const CadModel model = model_from_json(read_file(input));
    const ValidationReport report = validate(model);
    if (!report.ok()) {
        for (const auto& issue : report.issues) {
            std::cerr << "issue: " << issue.code << " at command " << issue.command_index << ": "
                      << issue.message << "\n";
        }
        return 2;
    }
    Solid solid;
    try {
        solid = build_solid(model);
        if (!out_mesh.empty()) {
            fs::path p(out_mesh);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            write_obj(solid, out_mesh);
        }
        if (!out_cloud.empty()) {
            const PointCloud cloud = sample_surface(solid, points, seed);
            fs::path p(out_cloud);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            if (p.extension() == ".xyz")
                write_xyz(cloud, out_cloud);
            else
                write_ply(cloud, out_cloud);
        }
    } catch (const CadError& e) {
        std::cerr << "issue: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return 2;
    }
    if (log_level() > 0) std::cerr << "ok: " << input << "\n";
    return 0;
}

// --- eval ----------------------------------------------------------------------------

struct CloudCache {
    std::vector<PointCloud> clouds;
    std::vector<bool> valid;
};

CloudCache sample_corpus_clouds(const Corpus& corpus, int points, uint64_t seed, int jobs) {
    CloudCache cache;
    cache.clouds.resize(corpus.size());
    cache.valid.assign(corpus.size(), false);
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        const auto& [id, model] = corpus.models[i];
        try {
            const Solid solid = build_solid(model);
            cache.clouds[i] = sample_surface(solid, points, id_seed(id, seed));
            cache.valid[i] = validate(model).ok();
        } catch (const CadError&) {
            cache.valid[i] = false;
        }
    });
    return cache;
}

int cmd_eval_ae(const std::string& truth_dir, const std::string& pred_dir, int eta, int points,
                uint64_t seed, int jobs, const std::string& dump_cd, const std::string& out) {
    MetricConfig mc;
    mc.eta = eta;
    mc.cd_points = points;
    mc.check();
    const Corpus truth = load_corpus(truth_dir);
    const Corpus pred = load_corpus(pred_dir);
    if (truth.size() != pred.size())
        throw CadError(ErrorCode::IdMismatch, "truth and prediction corpora differ in size");
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth.models[i].first != pred.models[i].first)
            throw CadError(ErrorCode::IdMismatch,
                           "prediction missing id " + truth.models[i].first);
    }
    if (truth.size() == 0) throw CadError(ErrorCode::EmptyInput, "empty corpora");

    double acc_cmd_sum = 0.0;
    double acc_param_sum = 0.0;
    int vacuous = 0;
    std::vector<TokenGrid> truth_grids(truth.size()), pred_grids(truth.size());
    parallel_for(truth.size(), jobs, [&](std::size_t i) {
        truth_grids[i] = tokenize(canonicalize(truth.models[i].second));
        pred_grids[i] = tokenize(canonicalize(pred.models[i].second));
    });
    for (std::size_t i = 0; i < truth.size(); ++i) {
        acc_cmd_sum += acc_cmd(truth_grids[i], pred_grids[i]);
        const ParamAccuracy pa = acc_param(truth_grids[i], pred_grids[i], eta);
        acc_param_sum += pa.value;
        vacuous += pa.vacuous ? 1 : 0;
    }

    // geometric comparison on shared per-id seeds
    const CloudCache truth_clouds = sample_corpus_clouds(truth, points, seed, jobs);
    const CloudCache pred_clouds = sample_corpus_clouds(pred, points, seed, jobs);
    std::vector<double> cds;
    std::vector<std::pair<std::size_t, double>> per_model_cd;
    std::vector<double> cd_slot(truth.size(), -1.0);
    parallel_for(truth.size(), jobs, [&](std::size_t i) {
        if (!truth_clouds.clouds[i].points.empty() && !pred_clouds.clouds[i].points.empty())
            cd_slot[i] = chamfer(truth_clouds.clouds[i], pred_clouds.clouds[i]);
    });
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (cd_slot[i] >= 0.0) {
            cds.push_back(cd_slot[i]);
            per_model_cd.push_back({i, cd_slot[i]});
        }
    }

    std::vector<CadModel> pred_models;
    for (const auto& [id, m] : pred.models) pred_models.push_back(m);
    const double inv_ratio = invalid_ratio(pred_models, points, seed);

    json report;
    report["mode"] = "ae";
    report["models"] = truth.size();
    report["acc_cmd"] = acc_cmd_sum / static_cast<double>(truth.size());
    report["acc_param"] = acc_param_sum / static_cast<double>(truth.size());
    report["acc_param_vacuous_models"] = vacuous;
    report["eta"] = eta;
    if (!cds.empty()) {
        const CdStats stats = aggregate_cd(cds);
        report["cd"] = {{"mean", stats.mean},
                        {"trimmed", stats.trimmed_mean},
                        {"median", stats.median},
                        {"count", cds.size()}};
        // Chamfer by sequence-length bucket (width 10) for failure analysis
        std::map<int, std::vector<double>> buckets;
        for (const auto& [i, cd] : per_model_cd) {
            const int len = static_cast<int>(flat_command_count(truth.models[i].second));
            buckets[len / 10 * 10].push_back(cd);
        }
        json by_len = json::array();
        for (auto& [lo, values] : buckets) {
            const CdStats bucket_stats = aggregate_cd(values);
            by_len.push_back({{"length_lo", lo},
                              {"length_hi", lo + 9},
                              {"count", values.size()},
                              {"median", bucket_stats.median},
                              {"mean", bucket_stats.mean}});
        }
        report["cd_by_length"] = std::move(by_len);
    }
    report["invalid_ratio"] = inv_ratio;

    if (!dump_cd.empty()) {
        std::ostringstream csv;
        csv << "id,length,cd\n";
        for (const auto& [i, cd] : per_model_cd) {
            csv << truth.models[i].first << ","
                << flat_command_count(truth.models[i].second) << "," << cd << "\n";
        }
        write_atomic(dump_cd, csv.str());
    }
    const std::string text = report.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_atomic(out, text);
    return 0;
}

int cmd_eval_gen(const std::string& ref_dir, const std::string& gen_dir, int points,
                 uint64_t seed, int jobs, int repeats, int ref_size, int gen_size,
                 const std::string& out) {
    MetricConfig mc;
    mc.cd_points = points;
    mc.check();
    const Corpus ref = load_corpus(ref_dir);
    const Corpus gen = load_corpus(gen_dir);
    if (ref.size() == 0 || gen.size() == 0)
        throw CadError(ErrorCode::EmptyInput, "empty reference or generated corpus");

    const CloudCache ref_clouds = sample_corpus_clouds(ref, points, seed, jobs);
    const CloudCache gen_clouds = sample_corpus_clouds(gen, points, seed, jobs);

    const auto collect = [](const CloudCache& cache) {
        std::vector<PointCloud> out_clouds;
        for (std::size_t i = 0; i < cache.clouds.size(); ++i) {
            if (!cache.clouds[i].points.empty()) out_clouds.push_back(cache.clouds[i]);
        }
        return out_clouds;
    };
    const std::vector<PointCloud> all_ref = collect(ref_clouds);
    const std::vector<PointCloud> all_gen = collect(gen_clouds);
    if (all_ref.empty() || all_gen.empty())
        throw CadError(ErrorCode::EmptyInput, "no executable models to compare");

    double cov_sum = 0.0, mmd_sum = 0.0, jsd_sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
        Rng rng(Rng::mix(seed, 40 + r));
        const auto subsample = [&rng](const std::vector<PointCloud>& set, int want) {
            if (want <= 0 || want >= static_cast<int>(set.size())) return set;
            std::vector<std::size_t> idx(set.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            rng.shuffle(idx);
            std::vector<PointCloud> out_set;
            for (int i = 0; i < want; ++i) out_set.push_back(set[idx[i]]);
            return out_set;
        };
        const std::vector<PointCloud> s = subsample(all_ref, ref_size);
        const std::vector<PointCloud> g = subsample(all_gen, gen_size);
        cov_sum += coverage(s, g);
        mmd_sum += mmd(s, g);
        jsd_sum += jsd(s, g);
    }

    json report;
    report["mode"] = "gen";
    report["reference_models"] = all_ref.size();
    report["generated_models"] = all_gen.size();
    report["repeats"] = repeats;
    report["cov"] = cov_sum / repeats;
    report["mmd"] = mmd_sum / repeats;
    report["jsd"] = jsd_sum / repeats;
    const std::string text = report.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        write_atomic(out, text);
    return 0;
}

// --- train ---------------------------------------------------------------------------

std::vector<TokenGrid> corpus_grids(const Corpus& corpus) {
    std::vector<TokenGrid> grids;
    grids.reserve(corpus.size());
    for (const auto& [id, model] : corpus.models) grids.push_back(tokenize(canonicalize(model)));
    return grids;
}

struct AccPair {
    double cmd = 0.0;
    double param = 0.0;
};

AccPair grid_accuracy(const Autoencoder& ae, const std::vector<TokenGrid>& grids, int eta,
                      std::size_t limit) {
    AccPair acc;
    const std::size_t n = std::min(limit, grids.size());
    for (std::size_t i = 0; i < n; ++i) {
        const TokenGrid pred = to_token_grid(ae.predict(to_seq_grid(grids[i])));
        acc.cmd += acc_cmd(grids[i], pred);
        acc.param += acc_param(grids[i], pred, eta).value;
    }
    acc.cmd /= static_cast<double>(n);
    acc.param /= static_cast<double>(n);
    return acc;
}

int cmd_train(const std::string& corpus_dir, const std::string& out_dir, bool desk, int steps,
              uint64_t seed, bool augment, int eval_every, double target_acc_cmd,
              double target_acc_param, const json& cfg_echo) {
    const Corpus corpus = load_corpus(corpus_dir);
    if (corpus.size() == 0) throw CadError(ErrorCode::EmptyInput, "empty corpus");

    Hyperparams hp = desk ? Hyperparams::desk() : Hyperparams::paper();
    Autoencoder ae(hp, seed);

    // split only when the corpus is big enough; tiny corpora train on all
    std::vector<std::size_t> train_idx;
    if (corpus.size() >= 20) {
        train_idx = split_corpus(corpus, seed).train;
    } else {
        for (std::size_t i = 0; i < corpus.size(); ++i) train_idx.push_back(i);
    }

    std::vector<TokenGrid> grids = corpus_grids(corpus);
    std::vector<SeqGrid> train_set;
    for (const std::size_t i : train_idx) train_set.push_back(to_seq_grid(grids[i]));
    std::vector<TokenGrid> train_grids;
    for (const std::size_t i : train_idx) train_grids.push_back(grids[i]);

    fs::create_directories(out_dir);
    write_atomic(fs::path(out_dir) / "config.json", cfg_echo.dump(2) + "\n");

    std::ostringstream log;
    log << "step,loss,loss_type,loss_param,lr,grad_norm\n";
    Rng batch_rng(Rng::mix(seed, 99));
    const auto t0 = std::chrono::steady_clock::now();
    for (int step = 1; step <= steps; ++step) {
        std::vector<SeqGrid> batch;
        for (int b = 0; b < hp.batch; ++b) {
            const std::size_t pick = batch_rng.below(train_idx.size());
            if (augment) {
                // mixing may push parameters outside the token ranges; such
                // draws fall back to the unaugmented sample
                Rng aug_rng(Rng::mix(seed, 7000 + static_cast<uint64_t>(step) * hp.batch + b));
                try {
                    const CadModel mixed =
                        augment_mix(corpus.models[train_idx[pick]].second, aug_rng, corpus);
                    batch.push_back(to_seq_grid(tokenize(mixed)));
                    continue;
                } catch (const CadError&) {
                }
            }
            batch.push_back(train_set[pick]);
        }
        const StepStats stats = ae.train_step(batch);
        log << step << "," << stats.loss << "," << stats.loss_type << "," << stats.loss_param
            << "," << stats.lr << "," << stats.grad_norm << "\n";

        if (eval_every > 0 && (step % eval_every == 0 || step == steps)) {
            const AccPair acc = grid_accuracy(ae, train_grids, 3, 64);
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (log_level() > 0)
                std::cerr << "step " << step << " loss " << stats.loss << " acc_cmd " << acc.cmd
                          << " acc_param " << acc.param << " (" << elapsed << " s)\n";
            if (acc.cmd >= target_acc_cmd && acc.param >= target_acc_param) {
                if (log_level() > 0) std::cerr << "targets reached at step " << step << "\n";
                break;
            }
        }
    }
    write_atomic(fs::path(out_dir) / "trainlog.csv", log.str());
    ae.save((fs::path(out_dir) / "ae.ckpt").string());
    if (log_level() > 0) std::cerr << "saved " << (fs::path(out_dir) / "ae.ckpt").string() << "\n";
    return 0;
}

// --- gan-train -------------------------------------------------------------------------

Mat synthetic_latents(int n, int dim, uint64_t seed) {
    // mixture of four Gaussian clusters: a stand-in for encoder outputs when
    // no trained autoencoder exists
    Rng rng(Rng::mix(seed, 55));
    std::vector<std::vector<double>> centers(4, std::vector<double>(dim));
    for (auto& c : centers) {
        for (double& v : c) v = rng.uniform(-2.0, 2.0);
    }
    Mat latents(n, dim);
    for (int i = 0; i < n; ++i) {
        const auto& c = centers[rng.below(4)];
        for (int j = 0; j < dim; ++j) latents.at(i, j) = c[j] + 0.3 * rng.normal();
    }
    return latents;
}

int cmd_gan_train(const std::string& out_dir, const std::string& latents_path,
                  bool use_synthetic, int latent_dim, bool desk, int iters, uint64_t seed,
                  const json& cfg_echo) {
    Mat latents;
    if (use_synthetic) {
        latents = synthetic_latents(2048, latent_dim, seed);
    } else {
        if (latents_path.empty())
            throw CadError(ErrorCode::BadConfig, "need --latents or --synthetic-latents");
        const auto blobs = read_blobs(latents_path);
        const Mat* blob = find_blob(blobs, "latents");
        if (!blob) throw CadError(ErrorCode::IoError, "no 'latents' tensor in " + latents_path);
        latents = *blob;
        latent_dim = static_cast<int>(latents.cols);
    }

    GanConfig cfg = desk ? GanConfig::desk(latent_dim) : GanConfig::paper(latent_dim);
    if (iters > 0) cfg.iters = iters;
    LatentGan gan(cfg, seed);

    fs::create_directories(out_dir);
    write_atomic(fs::path(out_dir) / "gan_config.json", cfg_echo.dump(2) + "\n");

    std::ostringstream log;
    log << "iter,critic_loss,gen_loss,critic_gap,penalty\n";
    Rng rng(Rng::mix(seed, 66));
    for (int it = 1; it <= cfg.iters; ++it) {
        Mat real(cfg.batch, latent_dim);
        for (int b = 0; b < cfg.batch; ++b) {
            const std::size_t row = rng.below(latents.rows);
            std::copy(latents.row(row), latents.row(row) + latent_dim, real.row(b));
        }
        const GanStepStats stats = gan.train_step(real);
        log << it << "," << stats.critic_loss << "," << stats.gen_loss << ","
            << stats.critic_gap << "," << stats.penalty << "\n";
        if (log_level() > 0 && it % std::max(1, cfg.iters / 10) == 0)
            std::cerr << "iter " << it << " critic " << stats.critic_loss << " gen "
                      << stats.gen_loss << " gap " << stats.critic_gap << "\n";
    }
    write_atomic(fs::path(out_dir) / "ganlog.csv", log.str());
    gan.save((fs::path(out_dir) / "gan.ckpt").string());
    return 0;
}

// --- encode / generate -------------------------------------------------------------------

int cmd_encode(const std::string& corpus_dir, const std::string& ae_path,
               const std::string& out_path) {
    const Corpus corpus = load_corpus(corpus_dir);
    const Autoencoder ae = Autoencoder::load(ae_path);
    Mat latents(corpus.size(), ae.hp().d_model);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto z = ae.encode(to_seq_grid(tokenize(canonicalize(corpus.models[i].second))));
        std::copy(z.begin(), z.end(), latents.row(i));
    }
    write_blobs(out_path, {{"latents", std::move(latents)}});
    if (log_level() > 0)
        std::cerr << "encoded " << corpus.size() << " models -> " << out_path << "\n";
    return 0;
}

int cmd_generate(int n, uint64_t seed, const std::string& ae_path, const std::string& gan_path,
                 const std::string& out_dir, int points) {
    const Autoencoder ae = Autoencoder::load(ae_path);
    const LatentGan gan = LatentGan::load(gan_path);
    const std::vector<GeneratedModel> generated = generate_models(gan, ae, n, seed);

    fs::create_directories(out_dir);
    std::vector<TokenGrid> grids;
    json report = json::array();
    int valid_count = 0;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const GeneratedModel& gm = generated[i];
        char name[32];
        std::snprintf(name, sizeof(name), "gen_%05zu", i);
        grids.push_back(gm.grid);
        if (gm.model) {
            write_atomic(fs::path(out_dir) / (std::string(name) + ".json"),
                         model_to_json(*gm.model));
        }
        if (gm.valid) {
            ++valid_count;
            const PointCloud cloud =
                sample_surface(build_solid(*gm.model), points, Rng::mix(seed, 500 + i));
            write_ply(cloud, (fs::path(out_dir) / (std::string(name) + ".ply")).string());
        }
        report.push_back({{"id", name},
                          {"parsed", gm.model.has_value()},
                          {"valid", gm.valid}});
    }
    write_grids((fs::path(out_dir) / "grids.csv").string(), grids);
    json summary;
    summary["count"] = generated.size();
    summary["valid"] = valid_count;
    summary["invalid_ratio"] =
        generated.empty()
            ? 0.0
            : 1.0 - static_cast<double>(valid_count) / static_cast<double>(generated.size());
    summary["models"] = std::move(report);
    write_atomic(fs::path(out_dir) / "validity_report.json", summary.dump(2) + "\n");
    if (log_level() > 0)
        std::cerr << "generated " << generated.size() << " (" << valid_count << " valid)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CAD command-sequence kernel and desk-scale learning stack"};
    app.require_subcommand(1);

    try {
        // validate-render
        auto* vr = app.add_subcommand("validate-render",
                                      "validate a model JSON and export mesh / point cloud");
        std::string vr_input, vr_mesh, vr_cloud;
        int vr_points = 2000;
        uint64_t vr_seed = 0;
        vr->add_option("input", vr_input, "model JSON file")->required();
        vr->add_option("--out-mesh", vr_mesh, "OBJ output path");
        vr->add_option("--out-cloud", vr_cloud, "PLY/XYZ output path");
        vr->add_option("--points", vr_points, "surface sample count");
        vr->add_option("--seed", vr_seed, "sampling seed");

        // eval
        auto* ev = app.add_subcommand("eval", "evaluate predictions or generated sets");
        std::string ev_mode = "ae", ev_truth, ev_pred, ev_ref, ev_gen, ev_dump, ev_out;
        int ev_eta = 3, ev_points = 2000, ev_jobs = 1, ev_repeats = 3, ev_ref_size = 0,
            ev_gen_size = 0;
        uint64_t ev_seed = 0;
        ev->add_option("--mode", ev_mode, "ae | gen")->check(CLI::IsMember({"ae", "gen"}));
        ev->add_option("--truth", ev_truth, "ground-truth model directory");
        ev->add_option("--pred", ev_pred, "predicted model directory");
        ev->add_option("--ref", ev_ref, "reference model directory");
        ev->add_option("--gen", ev_gen, "generated model directory");
        ev->add_option("--eta", ev_eta, "parameter tolerance in levels");
        ev->add_option("--points", ev_points, "surface samples per shape");
        ev->add_option("--seed", ev_seed, "sampling seed");
        ev->add_option("--jobs", ev_jobs, "evaluation fan-out");
        ev->add_option("--repeats", ev_repeats, "gen-mode repeat-and-average count");
        ev->add_option("--ref-size", ev_ref_size, "reference subsample per repeat (0 = all)");
        ev->add_option("--gen-size", ev_gen_size, "generated subsample per repeat (0 = all)");
        ev->add_option("--dump-cd", ev_dump, "per-model CD CSV path");
        ev->add_option("--out", ev_out, "report JSON path (default stdout)");

        // train
        auto* tr = app.add_subcommand("train", "train the autoencoder");
        std::string tr_corpus, tr_out = "out/train";
        bool tr_desk = false, tr_augment = false;
        int tr_steps = 3000, tr_eval_every = 100;
        double tr_target_cmd = 2.0, tr_target_param = 2.0;  // > 1 never triggers
        uint64_t tr_seed = 0;
        tr->add_option("--corpus", tr_corpus, "corpus directory")->required();
        tr->add_option("--out", tr_out, "output directory");
        tr->add_flag("--desk", tr_desk, "desk-scale hyperparameters");
        tr->add_flag("--augment", tr_augment, "mixing augmentation");
        tr->add_option("--steps", tr_steps, "training steps");
        tr->add_option("--seed", tr_seed, "seed");
        tr->add_option("--eval-every", tr_eval_every, "accuracy eval cadence (0 = off)");
        tr->add_option("--target-acc-cmd", tr_target_cmd, "early-stop command accuracy");
        tr->add_option("--target-acc-param", tr_target_param, "early-stop parameter accuracy");

        // gan-train
        auto* gt = app.add_subcommand("gan-train", "train the latent WGAN-GP");
        std::string gt_out = "out/gan", gt_latents;
        bool gt_desk = false, gt_synth = false;
        int gt_iters = 0, gt_latent_dim = 64;
        uint64_t gt_seed = 0;
        gt->add_option("--out", gt_out, "output directory");
        gt->add_option("--latents", gt_latents, "encoded latents file (from `encode`)");
        gt->add_flag("--synthetic-latents", gt_synth, "train against Gaussian-mixture latents");
        gt->add_option("--latent-dim", gt_latent_dim, "latent width for synthetic mode");
        gt->add_flag("--desk", gt_desk, "desk-scale GAN config");
        gt->add_option("--iters", gt_iters, "training iterations (0 = config default)");
        gt->add_option("--seed", gt_seed, "seed");

        // encode
        auto* en = app.add_subcommand("encode", "encode a corpus into latent vectors");
        std::string en_corpus, en_ae, en_out = "latents.bin";
        en->add_option("--corpus", en_corpus, "corpus directory")->required();
        en->add_option("--ae", en_ae, "autoencoder checkpoint")->required();
        en->add_option("--out", en_out, "latents output file");

        // generate
        auto* ge = app.add_subcommand("generate", "sample CAD models from the latent GAN");
        std::string ge_ae, ge_gan, ge_out = "out/generated";
        int ge_n = 10, ge_points = 2000;
        uint64_t ge_seed = 1;
        ge->add_option("--n", ge_n, "number of models");
        ge->add_option("--seed", ge_seed, "seed");
        ge->add_option("--ae", ge_ae, "autoencoder checkpoint")->required();
        ge->add_option("--gan", ge_gan, "GAN checkpoint")->required();
        ge->add_option("--out", ge_out, "output directory");
        ge->add_option("--points", ge_points, "cloud samples per valid model");

        // synth
        auto* sy = app.add_subcommand("synth", "generate a synthetic corpus");
        std::string sy_out = "out/synth";
        int sy_n = 64;
        uint64_t sy_seed = 0;
        sy->add_option("--n", sy_n, "corpus size");
        sy->add_option("--seed", sy_seed, "seed");
        sy->add_option("--out", sy_out, "corpus directory");

        // split
        auto* sp = app.add_subcommand("split", "deterministic 90/5/5 split");
        std::string sp_corpus, sp_out;
        uint64_t sp_seed = 0;
        sp->add_option("--corpus", sp_corpus, "corpus directory")->required();
        sp->add_option("--seed", sp_seed, "seed");
        sp->add_option("--out", sp_out, "split JSON path (default stdout)");

        // stats
        auto* st = app.add_subcommand("stats", "corpus statistics");
        std::string st_corpus, st_json, st_tsv;
        st->add_option("--corpus", st_corpus, "corpus directory")->required();
        st->add_option("--out-json", st_json, "stats JSON path (default stdout)");
        st->add_option("--out-tsv", st_tsv, "gnuplot-ready TSV path");

        // ranges
        auto* ra = app.add_subcommand("ranges", "dump the parameter range table");
        std::string ra_out;
        ra->add_option("--out", ra_out, "ranges JSON path (default stdout)");

        // tokenize / detokenize
        auto* tk = app.add_subcommand("tokenize", "corpus -> flat integer grids");
        std::string tk_corpus, tk_out = "grids.csv";
        tk->add_option("--corpus", tk_corpus, "corpus directory")->required();
        tk->add_option("--out", tk_out, "grid file");
        auto* dt = app.add_subcommand("detokenize", "flat integer grids -> corpus");
        std::string dt_in, dt_out = "out/detokenized";
        dt->add_option("--in", dt_in, "grid file")->required();
        dt->add_option("--out", dt_out, "corpus directory");

        // convert
        auto* cv = app.add_subcommand("convert", "re-encode curve positions");
        std::string cv_in, cv_out, cv_mode = "rel";
        cv->add_option("--in", cv_in, "model JSON")->required();
        cv->add_option("--out", cv_out, "output JSON")->required();
        cv->add_option("--mode", cv_mode, "rel | abs")->check(CLI::IsMember({"rel", "abs"}));

        app.parse(argc, argv);

        if (vr->parsed()) {
            echo_config("validate-render", {{"input", vr_input},
                                            {"out_mesh", vr_mesh},
                                            {"out_cloud", vr_cloud},
                                            {"points", vr_points},
                                            {"seed", vr_seed}});
            return cmd_validate_render(vr_input, vr_mesh, vr_cloud, vr_points, vr_seed);
        }
        if (ev->parsed()) {
            echo_config("eval", {{"mode", ev_mode},       {"truth", ev_truth},
                                 {"pred", ev_pred},       {"ref", ev_ref},
                                 {"gen", ev_gen},         {"eta", ev_eta},
                                 {"points", ev_points},   {"seed", ev_seed},
                                 {"jobs", ev_jobs},       {"repeats", ev_repeats},
                                 {"ref_size", ev_ref_size}, {"gen_size", ev_gen_size}});
            if (ev_mode == "ae") {
                if (ev_truth.empty() || ev_pred.empty())
                    throw CadError(ErrorCode::BadConfig, "ae mode needs --truth and --pred");
                return cmd_eval_ae(ev_truth, ev_pred, ev_eta, ev_points, ev_seed, ev_jobs,
                                   ev_dump, ev_out);
            }
            if (ev_ref.empty() || ev_gen.empty())
                throw CadError(ErrorCode::BadConfig, "gen mode needs --ref and --gen");
            return cmd_eval_gen(ev_ref, ev_gen, ev_points, ev_seed, ev_jobs, ev_repeats,
                                ev_ref_size, ev_gen_size, ev_out);
        }
        if (tr->parsed()) {
            const json cfg = {{"corpus", tr_corpus},   {"out", tr_out},
                              {"desk", tr_desk},       {"augment", tr_augment},
                              {"steps", tr_steps},     {"seed", tr_seed},
                              {"eval_every", tr_eval_every},
                              {"target_acc_cmd", tr_target_cmd},
                              {"target_acc_param", tr_target_param}};
            echo_config("train", cfg);
            return cmd_train(tr_corpus, tr_out, tr_desk, tr_steps, tr_seed, tr_augment,
                             tr_eval_every, tr_target_cmd, tr_target_param, cfg);
        }
        if (gt->parsed()) {
            const json cfg = {{"out", gt_out},           {"latents", gt_latents},
                              {"synthetic", gt_synth},   {"latent_dim", gt_latent_dim},
                              {"desk", gt_desk},         {"iters", gt_iters},
                              {"seed", gt_seed}};
            echo_config("gan-train", cfg);
            return cmd_gan_train(gt_out, gt_latents, gt_synth, gt_latent_dim, gt_desk, gt_iters,
                                 gt_seed, cfg);
        }
        if (en->parsed()) {
            echo_config("encode",
                        {{"corpus", en_corpus}, {"ae", en_ae}, {"out", en_out}});
            return cmd_encode(en_corpus, en_ae, en_out);
        }
        if (ge->parsed()) {
            echo_config("generate", {{"n", ge_n},
                                     {"seed", ge_seed},
                                     {"ae", ge_ae},
                                     {"gan", ge_gan},
                                     {"out", ge_out},
                                     {"points", ge_points}});
            return cmd_generate(ge_n, ge_seed, ge_ae, ge_gan, ge_out, ge_points);
        }
        if (sy->parsed()) {
            echo_config("synth", {{"n", sy_n}, {"seed", sy_seed}, {"out", sy_out}});
            save_corpus(synth_corpus(sy_n, sy_seed), sy_out);
            if (log_level() > 0) std::cerr << "wrote " << sy_n << " models to " << sy_out << "\n";
            return 0;
        }
        if (sp->parsed()) {
            echo_config("split", {{"corpus", sp_corpus}, {"seed", sp_seed}});
            const Corpus corpus = load_corpus(sp_corpus);
            const CorpusSplit split = split_corpus(corpus, sp_seed);
            json j;
            const auto ids = [&corpus](const std::vector<std::size_t>& idx) {
                json arr = json::array();
                for (const std::size_t i : idx) arr.push_back(corpus.models[i].first);
                return arr;
            };
            j["train"] = ids(split.train);
            j["val"] = ids(split.val);
            j["test"] = ids(split.test);
            const std::string text = j.dump(2) + "\n";
            if (sp_out.empty())
                std::cout << text;
            else
                write_atomic(sp_out, text);
            return 0;
        }
        if (st->parsed()) {
            echo_config("stats", {{"corpus", st_corpus}});
            const CorpusStats stats = corpus_stats(load_corpus(st_corpus));
            if (st_json.empty())
                std::cout << stats.to_json();
            else
                write_atomic(st_json, stats.to_json());
            if (!st_tsv.empty()) write_atomic(st_tsv, stats.to_tsv());
            return 0;
        }
        if (ra->parsed()) {
            echo_config("ranges", {});
            if (ra_out.empty())
                std::cout << ranges_to_json();
            else
                write_atomic(ra_out, ranges_to_json());
            return 0;
        }
        if (tk->parsed()) {
            echo_config("tokenize", {{"corpus", tk_corpus}, {"out", tk_out}});
            const Corpus corpus = load_corpus(tk_corpus);
            std::vector<TokenGrid> grids;
            for (const auto& [id, model] : corpus.models) grids.push_back(tokenize(model));
            fs::path p(tk_out);
            if (p.has_parent_path()) fs::create_directories(p.parent_path());
            write_grids(tk_out, grids);
            return 0;
        }
        if (dt->parsed()) {
            echo_config("detokenize", {{"in", dt_in}, {"out", dt_out}});
            const std::vector<TokenGrid> grids = read_grids(dt_in);
            Corpus corpus;
            for (std::size_t i = 0; i < grids.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "model_%05zu", i);
                corpus.models.emplace_back(name, detokenize(grids[i]));
            }
            save_corpus(corpus, dt_out);
            return 0;
        }
        if (cv->parsed()) {
            echo_config("convert", {{"in", cv_in}, {"out", cv_out}, {"mode", cv_mode}});
            const CadModel model = model_from_json(read_file(cv_in));
            const CadModel converted = cv_mode == "rel" ? to_relative(model) : to_absolute(model);
            write_atomic(cv_out, model_to_json(converted));
            return 0;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const CadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
