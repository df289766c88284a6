// Command-level accuracies, Chamfer distance and the set-level generation
// metrics.

#include <algorithm>
#include <cmath>
#include <limits>

#include "cadseq/kernels.hpp"
#include "cadseq/metrics.hpp"
#include "cadseq/rng.hpp"

namespace cadseq {

double acc_cmd(const TokenGrid& truth, const TokenGrid& pred) {
    int hits = 0;
    for (int i = 0; i < kMaxCommands; ++i) {
        if (truth.rows[i][0] == pred.rows[i][0]) ++hits;
    }
    return static_cast<double>(hits) / kMaxCommands;
}

ParamAccuracy acc_param(const TokenGrid& truth, const TokenGrid& pred, int eta) {
    long total = 0;
    long hits = 0;
    for (int i = 0; i < kMaxCommands; ++i) {
        if (truth.rows[i][0] != pred.rows[i][0]) continue;
        const CommandKind kind = command_kind_from_code(truth.rows[i][0]);
        for (int s = 0; s < kNumParamSlots; ++s) {
            if (!slot_used(kind, s)) continue;
            ++total;
            if (std::abs(truth.rows[i][s + 1] - pred.rows[i][s + 1]) < eta) ++hits;
        }
    }
    if (total == 0) return {1.0, true};
    return {static_cast<double>(hits) / static_cast<double>(total), false};
}

namespace {

struct Soa {
    std::vector<double> xs, ys, zs;
    explicit Soa(const PointCloud& c) {
        xs.reserve(c.points.size());
        ys.reserve(c.points.size());
        zs.reserve(c.points.size());
        for (const Vec3& p : c.points) {
            xs.push_back(p.x);
            ys.push_back(p.y);
            zs.push_back(p.z);
        }
    }
};

double mean_nn_sqdist(const PointCloud& from, const Soa& to, std::size_t to_n) {
    double acc = 0.0;
    for (const Vec3& p : from.points) {
        acc += kernels::min_sqdist3(p.x, p.y, p.z, to.xs.data(), to.ys.data(), to.zs.data(),
                                    to_n);
    }
    return acc / static_cast<double>(from.points.size());
}

}  // namespace

double chamfer(const PointCloud& x, const PointCloud& y) {
    if (x.points.empty() || y.points.empty())
        throw CadError(ErrorCode::EmptyCloud, "chamfer over an empty point cloud");
    const Soa sx(x), sy(y);
    return mean_nn_sqdist(x, sy, y.points.size()) + mean_nn_sqdist(y, sx, x.points.size());
}

CdStats aggregate_cd(std::vector<double> scores, double trim_fraction) {
    if (scores.empty()) throw CadError(ErrorCode::EmptyInput, "no CD scores to aggregate");
    CdStats stats;
    const std::size_t n = scores.size();
    double sum = 0.0;
    for (double v : scores) sum += v;
    stats.mean = sum / static_cast<double>(n);

    std::sort(scores.begin(), scores.end());
    stats.median = scores[(n - 1) / 2];

    const std::size_t drop = static_cast<std::size_t>(std::floor(trim_fraction * n));
    double trimmed_sum = 0.0;
    for (std::size_t i = drop; i < n - drop; ++i) trimmed_sum += scores[i];
    stats.trimmed_mean = trimmed_sum / static_cast<double>(n - 2 * drop);
    return stats;
}

double invalid_ratio(const std::vector<CadModel>& models, int sample_points, uint64_t seed) {
    if (models.empty()) throw CadError(ErrorCode::EmptyInput, "invalid ratio of an empty corpus");
    int bad = 0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (!check_solid_valid(models[i], sample_points, Rng::mix(seed, i))) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(models.size());
}

double coverage(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g) {
    if (s.empty() || g.empty()) throw CadError(ErrorCode::EmptyInput, "coverage over empty sets");
    std::vector<bool> matched(s.size(), false);
    for (const PointCloud& x : g) {
        std::size_t best = 0;
        double best_cd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double cd = chamfer(x, s[i]);
            if (cd < best_cd) {
                best_cd = cd;
                best = i;
            }
        }
        matched[best] = true;
    }
    long hit = std::count(matched.begin(), matched.end(), true);
    return static_cast<double>(hit) / static_cast<double>(s.size());
}

double mmd(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g) {
    if (s.empty() || g.empty()) throw CadError(ErrorCode::EmptyInput, "mmd over empty sets");
    double acc = 0.0;
    for (const PointCloud& y : s) {
        double best = std::numeric_limits<double>::infinity();
        for (const PointCloud& x : g) best = std::min(best, chamfer(x, y));
        acc += best;
    }
    return acc / static_cast<double>(s.size());
}

namespace {

std::vector<double> voxel_distribution(const std::vector<PointCloud>& set, int grid) {
    std::vector<double> hist(static_cast<std::size_t>(grid) * grid * grid, 0.0);
    double total = 0.0;
    for (const PointCloud& cloud : set) {
        for (const Vec3& p : cloud.points) {
            // points are expected in [-1, 1]^3; stragglers clamp to edge cells
            const auto cell = [&](double v) {
                const int c = static_cast<int>((v + 1.0) * 0.5 * grid);
                return std::min(std::max(c, 0), grid - 1);
            };
            hist[(static_cast<std::size_t>(cell(p.x)) * grid + cell(p.y)) * grid + cell(p.z)] +=
                1.0;
            total += 1.0;
        }
    }
    if (total > 0.0) {
        for (double& v : hist) v /= total;
    }
    return hist;
}

}  // namespace

double jsd(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g, int grid) {
    if (s.empty() || g.empty()) throw CadError(ErrorCode::EmptyInput, "jsd over empty sets");
    const std::vector<double> ps = voxel_distribution(s, grid);
    const std::vector<double> pg = voxel_distribution(g, grid);
    double kl_s = 0.0, kl_g = 0.0;  // natural log; 0 * log 0 := 0
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double m = 0.5 * (ps[i] + pg[i]);
        if (ps[i] > 0.0) kl_s += ps[i] * std::log(ps[i] / m);
        if (pg[i] > 0.0) kl_g += pg[i] * std::log(pg[i] / m);
    }
    return 0.5 * kl_s + 0.5 * kl_g;
}

}  // namespace cadseq
