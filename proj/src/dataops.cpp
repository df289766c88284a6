// Corpus IO, deterministic splitting, mixing augmentation, synthetic corpus
// generation and dataset statistics.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cadseq/dataops.hpp"
#include "cadseq/geometry.hpp"
#include "cadseq/tokenize.hpp"

namespace cadseq {

namespace fs = std::filesystem;

namespace {
constexpr double kPi = 3.14159265358979323846;

uint64_t fnv1a(uint64_t h, const std::string& s) {
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw CadError(ErrorCode::IoError, "cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Corpus load_corpus(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw CadError(ErrorCode::IoError, "corpus directory not found: " + dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "manifest.json")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Corpus corpus;
    uint64_t hash = 1469598103934665603ULL;
    for (const fs::path& f : files) {
        const std::string text = read_file(f);
        hash = fnv1a(hash, f.filename().string());
        hash = fnv1a(hash, text);
        corpus.models.emplace_back(f.stem().string(), model_from_json(text));
    }
    std::ostringstream h;
    h << std::hex << hash;
    corpus.manifest_hash = h.str();
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
    fs::create_directories(dir);
    uint64_t hash = 1469598103934665603ULL;
    std::ostringstream manifest;
    manifest << "{\n  \"count\": " << corpus.models.size() << ",\n  \"files\": [";
    for (std::size_t i = 0; i < corpus.models.size(); ++i) {
        const auto& [id, model] = corpus.models[i];
        const std::string text = model_to_json(model);
        const std::string name = id + ".json";
        {
            std::ofstream out(fs::path(dir) / name, std::ios::binary);
            if (!out) throw CadError(ErrorCode::IoError, "cannot write " + name);
            out << text;
        }
        hash = fnv1a(hash, name);
        hash = fnv1a(hash, text);
        manifest << (i ? ", " : "") << '"' << name << '"';
    }
    std::ostringstream h;
    h << std::hex << hash;
    manifest << "],\n  \"fnv1a\": \"" << h.str() << "\"\n}\n";
    std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
    out << manifest.str();
}

CorpusSplit split_corpus(const Corpus& corpus, uint64_t seed) {
    const std::size_t n = corpus.size();
    if (n < 20) throw CadError(ErrorCode::TooSmall, "corpus needs at least 20 models");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(Rng::mix(seed, 3));
    rng.shuffle(order);
    const std::size_t n_val = n / 20;
    const std::size_t n_test = n / 20;
    const std::size_t n_train = n - n_val - n_test;
    CorpusSplit split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    return split;
}

CadModel augment_mix(const CadModel& model, Rng& rng, const Corpus& corpus) {
    if (rng.chance(0.5)) return model;
    if (model.pairs.size() < 2) return model;
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus.models[i].second.pairs.size() >= 2) candidates.push_back(i);
    }
    if (candidates.empty()) return model;
    const CadModel& other = corpus.models[candidates[rng.below(candidates.size())]].second;

    const std::size_t max_k = std::min(model.pairs.size(), other.pairs.size());
    const std::size_t k = 1 + rng.below(max_k);
    const auto pick = [&rng](std::size_t count, std::size_t take) {
        std::vector<std::size_t> idx(count);
        for (std::size_t i = 0; i < count; ++i) idx[i] = i;
        rng.shuffle(idx);
        idx.resize(take);
        std::sort(idx.begin(), idx.end());
        return idx;
    };
    const auto from_a = pick(model.pairs.size(), k);
    const auto from_b = pick(other.pairs.size(), k);
    CadModel mixed = model;
    for (std::size_t t = 0; t < k; ++t) mixed.pairs[from_a[t]] = other.pairs[from_b[t]];
    return canonicalize(mixed);
}

// --- synthetic corpus --------------------------------------------------------------

namespace {

Loop chain_loop(std::vector<Curve> curves, Vec2 start) {
    Loop loop;
    loop.start = start;
    loop.curves = std::move(curves);
    return loop;
}

Loop rect_loop(Vec2 c, double w, double h) {
    const Vec2 a{c.x - w / 2, c.y - h / 2};
    return chain_loop({LineCurve{{c.x + w / 2, c.y - h / 2}},
                       LineCurve{{c.x + w / 2, c.y + h / 2}},
                       LineCurve{{c.x - w / 2, c.y + h / 2}}, LineCurve{a}},
                      a);
}

Loop circle_loop(Vec2 c, double r) {
    Loop loop;
    loop.curves.push_back(CircleCurve{c, r});
    loop.start = {c.x - r, c.y};
    return loop;
}

Loop ngon_loop(Vec2 c, double radius, int n) {
    std::vector<Curve> curves;
    const double a0 = -kPi / 2;
    for (int i = 1; i <= n; ++i) {
        const double a = a0 + 2.0 * kPi * i / n;
        curves.push_back(LineCurve{{c.x + radius * std::cos(a), c.y + radius * std::sin(a)}});
    }
    return chain_loop(std::move(curves), {c.x + radius * std::cos(a0), c.y + radius * std::sin(a0)});
}

Loop rounded_rect_loop(Vec2 c, double w, double h, double rc) {
    const double x0 = c.x - w / 2, x1 = c.x + w / 2;
    const double y0 = c.y - h / 2, y1 = c.y + h / 2;
    std::vector<Curve> curves;
    curves.push_back(LineCurve{{x1 - rc, y0}});
    curves.push_back(ArcCurve{{x1, y0 + rc}, kPi / 2, true});
    curves.push_back(LineCurve{{x1, y1 - rc}});
    curves.push_back(ArcCurve{{x1 - rc, y1}, kPi / 2, true});
    curves.push_back(LineCurve{{x0 + rc, y1}});
    curves.push_back(ArcCurve{{x0, y1 - rc}, kPi / 2, true});
    curves.push_back(LineCurve{{x0, y0 + rc}});
    curves.push_back(ArcCurve{{x0 + rc, y0}, kPi / 2, true});
    return chain_loop(std::move(curves), {x0 + rc, y0});
}

bool slots_in_range(const CadModel& model) {
    try {
        const CadSequence seq = flatten(model);
        for (const CadCommand& cmd : seq.cmds) {
            for (int s = 0; s < kNumParamSlots; ++s) {
                if (slot_used(cmd.kind, s)) (void)quantize_value(cmd.p[s], s);
            }
        }
        return true;
    } catch (const CadError&) {
        return false;
    }
}

CadModel synth_model_attempt(Rng& rng) {
    const double pick_pairs = rng.uniform();
    const int n_pairs = pick_pairs < 0.5 ? 1 : (pick_pairs < 0.8 ? 2 : 3);

    CadModel model;
    Vec3 cursor{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    for (int pi = 0; pi < n_pairs; ++pi) {
        SketchExtrudePair pair;
        auto& e = pair.extrude;
        e.op = pi == 0 ? BooleanOp::NewBody
                       : (rng.chance(0.8) ? BooleanOp::Join : BooleanOp::Cut);
        const double size = (e.op == BooleanOp::Cut ? 0.5 : 1.0) * rng.uniform(0.5, 1.0);

        const double shape_pick = rng.uniform();
        Profile profile;
        double extent = 0.0;
        if (shape_pick < 0.3) {
            const double w = size * rng.uniform(0.6, 1.0);
            const double h = size * rng.uniform(0.6, 1.0);
            profile.push_back(rect_loop({0, 0}, w, h));
            extent = std::max(w, h);
            if (rng.chance(0.3))
                profile.push_back(circle_loop({0, 0}, 0.2 * std::min(w, h)));
        } else if (shape_pick < 0.55) {
            const double r = size * rng.uniform(0.3, 0.5);
            profile.push_back(circle_loop({0, 0}, r));
            extent = 2 * r;
        } else if (shape_pick < 0.75) {
            const int sides = rng.chance(0.5) ? 6 : (rng.chance(0.5) ? 5 : 3);
            const double r = size * rng.uniform(0.35, 0.5);
            profile.push_back(ngon_loop({0, 0}, r, sides));
            extent = 2 * r;
            if (sides == 6 && rng.chance(0.3))
                profile.push_back(circle_loop({0, 0}, 0.35 * r));
        } else {
            const double w = size * rng.uniform(0.7, 1.0);
            const double h = size * rng.uniform(0.7, 1.0);
            profile.push_back(rounded_rect_loop({0, 0}, w, h, 0.25 * std::min(w, h)));
            extent = std::max(w, h);
            if (rng.chance(0.25))
                profile.push_back(circle_loop({0, 0}, 0.18 * std::min(w, h)));
        }
        pair.profile = std::move(profile);

        // mostly upright planes keep multi-body models compact
        if (rng.chance(0.6)) {
            e.theta = 0.0;
            e.phi = 0.0;
            e.gamma = rng.uniform(-kPi * 0.9, kPi * 0.9);
        } else {
            e.theta = rng.uniform(-kPi * 0.9, kPi * 0.9);
            e.phi = rng.uniform(-kPi * 0.9, kPi * 0.9);
            e.gamma = rng.uniform(-kPi * 0.9, kPi * 0.9);
        }
        e.origin = cursor;
        e.scale = 1.0;

        const double u_pick = rng.uniform();
        const double depth = extent * rng.uniform(0.15, 0.3);
        if (u_pick < 0.6) {
            e.extent = ExtentKind::OneSided;
            e.e1 = depth;
            e.e2 = 0.0;
        } else if (u_pick < 0.85) {
            e.extent = ExtentKind::Symmetric;
            e.e1 = depth;
            e.e2 = 0.0;
        } else {
            e.extent = ExtentKind::TwoSided;
            e.e1 = depth * 0.6;
            e.e2 = depth * 0.4;
        }
        normalize_pair_profile_in_place(pair);
        model.pairs.push_back(std::move(pair));

        cursor = cursor + Vec3{rng.uniform(-0.4, 0.4) * size, rng.uniform(-0.4, 0.4) * size,
                               rng.uniform(-0.4, 0.4) * size};
    }
    return model;
}

}  // namespace

Corpus synth_corpus(int n, uint64_t seed) {
    if (n < 1) throw CadError(ErrorCode::TooSmall, "synthetic corpus size must be >= 1");
    Corpus corpus;
    for (int i = 0; i < n; ++i) {
        Rng rng(Rng::mix(seed, static_cast<uint64_t>(i)));
        bool made = false;
        for (int attempt = 0; attempt < 200 && !made; ++attempt) {
            try {
                CadModel model = synth_model_attempt(rng);
                model = canonicalize(model);
                if (!validate(model).ok()) continue;
                if (flat_command_count(model) > kMaxCommands) continue;

                // center, then scale into the 2x2x2 cube
                const Box3 box = model_bbox(model);
                const Vec3 center = box.center();
                for (auto& pair : model.pairs) pair.extrude.origin = pair.extrude.origin - center;

                // Snap every parameter onto the quantization lattice so token
                // round-trips are exactly stable. The first snap can move the
                // executed bounding box (an off-lattice theta near a pole
                // flips the frame reference axis when quantized), so
                // normalize and re-snap until the extent settles at 2.
                const auto lattice_snap = [](const CadModel& m) {
                    return parse(dequantize_grid(quantize_sequence(flatten(m))));
                };
                bool settled = false;
                for (int pass = 0; pass < 4 && !settled; ++pass) {
                    (void)normalize_model_in_place(model, /*snap_near_identity=*/false);
                    if (!slots_in_range(model)) break;
                    model = lattice_snap(model);
                    settled = std::abs(model_bbox(model).max_extent() - 2.0) <= 0.02;
                }
                if (!settled) continue;
                if (!validate(model).ok()) continue;
                if (!check_solid_valid(model, 256, Rng::mix(seed, 7777 + i))) continue;

                char name[32];
                std::snprintf(name, sizeof(name), "synth_%05d", i);
                corpus.models.emplace_back(name, std::move(model));
                made = true;
            } catch (const CadError&) {
                continue;
            }
        }
        if (!made)
            throw CadError(ErrorCode::EmptyGeometry,
                           "synthetic generator failed for model " + std::to_string(i));
    }
    return corpus;
}

// --- statistics ----------------------------------------------------------------------

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    for (const auto& [id, model] : corpus.models) {
        stats.length_histogram[static_cast<int>(flat_command_count(model))] += 1;
        stats.extrusion_count_histogram[static_cast<int>(model.pairs.size())] += 1;
        for (const auto& pair : model.pairs) {
            for (const Loop& loop : pair.profile) {
                for (const Curve& c : loop.curves) {
                    if (std::holds_alternative<LineCurve>(c)) ++stats.line_count;
                    else if (std::holds_alternative<ArcCurve>(c)) ++stats.arc_count;
                    else ++stats.circle_count;
                }
            }
        }
    }
    return stats;
}

std::string CorpusStats::to_json() const {
    std::ostringstream out;
    const auto hist = [&out](const std::map<int, int>& h) {
        out << "{";
        bool first = true;
        for (const auto& [k, v] : h) {
            out << (first ? "" : ", ") << '"' << k << "\": " << v;
            first = false;
        }
        out << "}";
    };
    out << "{\n  \"length_histogram\": ";
    hist(length_histogram);
    out << ",\n  \"extrusion_count_histogram\": ";
    hist(extrusion_count_histogram);
    out << ",\n  \"curve_type_counts\": {\"line\": " << line_count << ", \"arc\": " << arc_count
        << ", \"circle\": " << circle_count << "}\n}\n";
    return out.str();
}

std::string CorpusStats::to_tsv() const {
    std::ostringstream out;
    out << "# kind\tbin\tcount\n";
    for (const auto& [k, v] : length_histogram) out << "length\t" << k << "\t" << v << "\n";
    for (const auto& [k, v] : extrusion_count_histogram)
        out << "extrusions\t" << k << "\t" << v << "\n";
    out << "curves\tline\t" << line_count << "\n";
    out << "curves\tarc\t" << arc_count << "\n";
    out << "curves\tcircle\t" << circle_count << "\n";
    return out.str();
}

}  // namespace cadseq
