#pragma once

#include <vector>

#include "cadseq/geometry.hpp"
#include "cadseq/tokenize.hpp"

namespace cadseq {

struct MetricConfig {
    int eta = 3;               // parameter tolerance in quantized levels
    int cd_points = 2000;      // surface samples per shape
    int jsd_grid = 28;         // voxel cells per axis over [-1, 1]^3
    double trim_fraction = 0.10;

    void check() const {
        if (eta < 0 || jsd_grid < 2 || cd_points < 1 || trim_fraction < 0.0 ||
            trim_fraction >= 0.5)
            throw CadError(ErrorCode::BadConfig, "bad metric configuration");
    }
};

// Fraction of positions (all Nc, EOS included) with matching command type.
double acc_cmd(const TokenGrid& truth, const TokenGrid& pred);

struct ParamAccuracy {
    double value = 1.0;
    bool vacuous = false;  // no correctly-typed command carries parameters
};

// Over positions with matching type: fraction of the truth-used parameters
// within |truth - pred| < eta quantized levels.
ParamAccuracy acc_param(const TokenGrid& truth, const TokenGrid& pred, int eta = 3);

// Symmetric sum of mean nearest-neighbor squared distances. The inner scan
// runs on the dispatched min_sqdist3 kernel and is exactly equal to the
// scalar brute force.
double chamfer(const PointCloud& x, const PointCloud& y);

struct CdStats {
    double mean = 0.0;
    double trimmed_mean = 0.0;  // drops floor(trim * n) largest and smallest
    double median = 0.0;        // lower-middle for even n
};

CdStats aggregate_cd(std::vector<double> scores, double trim_fraction = 0.10);

double invalid_ratio(const std::vector<CadModel>& models, int sample_points = 2000,
                     uint64_t seed = 0);

// Generation metrics over point-cloud sets (reference S, generated G).
double coverage(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g);
double mmd(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g);
double jsd(const std::vector<PointCloud>& s, const std::vector<PointCloud>& g, int grid = 28);

}  // namespace cadseq
