// Normalization and 256-level quantization between continuous command
// sequences and integer token grids.

#include <cmath>
#include <fstream>
#include <sstream>

#include "cadseq/geometry.hpp"
#include "cadseq/tokenize.hpp"

namespace cadseq {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Inputs this close to normalized are treated as already normalized. The
// model window must exceed the worst-case bounding-box drift a full
// quantize/dequantize cycle can cause (~3e-2 from origin, scale and
// coordinate half-steps combined), or detokenized models would re-normalize
// and shift levels. Profile bounding boxes only drift by coordinate
// half-steps, so their window is tighter.
constexpr double kModelSnapTol = 0.05;
constexpr double kProfileSnapTol = 0.02;

constexpr double kRangeDust = 1e-9;  // clamped; beyond this is an error
}  // namespace

const std::array<SlotRange, kNumParamSlots>& param_ranges() {
    static const std::array<SlotRange, kNumParamSlots> table = {{
        {"x", 0.0, 1.0, false, 0},
        {"y", 0.0, 1.0, false, 0},
        {"alpha", 0.0, 2.0 * kPi, false, 0},
        {"f", 0.0, 1.0, true, 1},
        {"r", 0.0, 1.0, false, 0},
        {"theta", -kPi, kPi, false, 0},
        {"phi", -kPi, kPi, false, 0},
        {"gamma", -kPi, kPi, false, 0},
        {"px", -1.0, 1.0, false, 0},
        {"py", -1.0, 1.0, false, 0},
        {"pz", -1.0, 1.0, false, 0},
        {"s", 0.0, 2.0, false, 0},
        {"e1", -1.0, 1.0, false, 0},
        {"e2", -1.0, 1.0, false, 0},
        {"b", 0.0, 3.0, true, 3},
        {"u", 0.0, 2.0, true, 2},
    }};
    return table;
}

std::string ranges_to_json() {
    std::ostringstream out;
    out.precision(17);
    out << "{\n  \"levels\": " << kQuantLevels << ",\n  \"slots\": [\n";
    const auto& table = param_ranges();
    for (int s = 0; s < kNumParamSlots; ++s) {
        const SlotRange& r = table[s];
        out << "    {\"name\": \"" << r.name << "\", \"kind\": \""
            << (r.discrete ? "discrete" : "continuous") << "\"";
        if (r.discrete)
            out << ", \"codes\": " << (r.max_code + 1);
        else
            out << ", \"lo\": " << r.lo << ", \"hi\": " << r.hi;
        out << "}" << (s + 1 < kNumParamSlots ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

int quantize_value(double v, int slot) {
    const SlotRange& r = param_ranges()[slot];
    if (r.discrete) {
        const int code = static_cast<int>(std::lround(v));
        if (code < 0 || code > r.max_code)
            throw CadError(ErrorCode::OutOfRange,
                           std::string(r.name) + " discrete code " + std::to_string(code),
                           slot);
        return code;
    }
    if (v < r.lo - kRangeDust || v > r.hi + kRangeDust)
        throw CadError(ErrorCode::OutOfRange,
                       std::string(r.name) + " = " + std::to_string(v) + " outside [" +
                           std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]",
                       slot);
    const double clamped = std::min(std::max(v, r.lo), r.hi);
    const double t = (clamped - r.lo) / (r.hi - r.lo) * (kQuantLevels - 1);
    const int level = static_cast<int>(std::round(t));  // round half away from zero
    return std::min(std::max(level, 0), kQuantLevels - 1);
}

double dequantize_value(int level, int slot) {
    const SlotRange& r = param_ranges()[slot];
    if (r.discrete) {
        if (level < 0 || level > r.max_code)
            throw CadError(ErrorCode::BadLevel,
                           std::string(r.name) + " discrete code " + std::to_string(level), slot);
        return static_cast<double>(level);
    }
    if (level < 0 || level >= kQuantLevels)
        throw CadError(ErrorCode::BadLevel,
                       std::string(r.name) + " level " + std::to_string(level), slot);
    return r.lo + static_cast<double>(level) / (kQuantLevels - 1) * (r.hi - r.lo);
}

double normalize_model_in_place(CadModel& model, bool snap_near_identity) {
    const Box3 box = model_bbox(model);
    const double extent = box.max_extent();
    if (!(extent > 1e-12) || !std::isfinite(extent))
        throw CadError(ErrorCode::EmptyGeometry, "degenerate bounding box");
    double k = 2.0 / extent;
    if (snap_near_identity && std::abs(k - 1.0) <= kModelSnapTol) return 1.0;
    for (auto& pair : model.pairs) {
        auto& e = pair.extrude;
        e.origin = e.origin * k;
        e.scale *= k;
        e.e1 *= k;
        e.e2 *= k;
    }
    return k;
}

namespace {

Box2 profile_bbox(const Profile& profile) {
    Box2 box;
    for (const Loop& loop : profile) {
        const Ring ring = tessellate_loop(loop);
        for (const Vec2& p : ring.pts) box.expand(p);
    }
    return box;
}

void shift_scale_profile(Profile& profile, Vec2 center, double inv_scale) {
    const Vec2 c{0.5, 0.5};
    const auto map = [&](Vec2 p) { return (p - center) * inv_scale + c; };
    for (Loop& loop : profile) {
        loop.start = map(loop.start);
        for (Curve& curve : loop.curves) {
            if (auto* line = std::get_if<LineCurve>(&curve)) {
                line->end = map(line->end);
            } else if (auto* arc = std::get_if<ArcCurve>(&curve)) {
                arc->end = map(arc->end);
            } else {
                auto& circle = std::get<CircleCurve>(curve);
                circle.center = map(circle.center);
                circle.radius *= inv_scale;
            }
        }
    }
}

}  // namespace

std::pair<Profile, double> normalize_profile(const Profile& profile) {
    const Box2 box = profile_bbox(profile);
    const double extent = box.max_extent();
    if (!(extent > 1e-12) || !std::isfinite(extent))
        throw CadError(ErrorCode::DegenerateProfile, "zero-extent profile bounding box");
    Profile out = profile;
    shift_scale_profile(out, box.center(), 1.0 / extent);
    return {std::move(out), extent};
}

void normalize_pair_profile_in_place(SketchExtrudePair& pair) {
    const Box2 box = profile_bbox(pair.profile);
    const double extent = box.max_extent();
    if (!(extent > 1e-12) || !std::isfinite(extent))
        throw CadError(ErrorCode::DegenerateProfile, "zero-extent profile bounding box");
    const Vec2 c{0.5, 0.5};
    const Vec2 center = box.center();
    if (std::abs(extent - 1.0) <= kProfileSnapTol &&
        std::abs(center.x - c.x) <= kProfileSnapTol &&
        std::abs(center.y - c.y) <= kProfileSnapTol)
        return;  // already normalized

    shift_scale_profile(pair.profile, center, 1.0 / extent);
    auto& e = pair.extrude;
    // keep the executed shape fixed: the old image of the bbox center becomes
    // the new image of (0.5, 0.5)
    const PlaneFrame frame = plane_frame(e.theta, e.phi, e.gamma, e.origin);
    const Vec2 delta = center - c;
    e.origin = e.origin + (frame.u_axis * delta.x + frame.v_axis * delta.y) * e.scale;
    e.scale *= extent;
}

TokenGrid quantize_sequence(const CadSequence& seq) {
    if (seq.size() != kMaxCommands)
        throw CadError(ErrorCode::LengthMismatch, "sequence length != " +
                                                       std::to_string(kMaxCommands));
    TokenGrid grid;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const CadCommand& cmd = seq[i];
        grid.rows[i][0] = static_cast<int>(cmd.kind);
        for (int s = 0; s < kNumParamSlots; ++s) {
            grid.rows[i][s + 1] = slot_used(cmd.kind, s) ? quantize_value(cmd.p[s], s) : -1;
        }
    }
    return grid;
}

CadSequence dequantize_grid(const TokenGrid& grid) {
    CadSequence seq;
    seq.cmds.reserve(kMaxCommands);
    for (int i = 0; i < kMaxCommands; ++i) {
        CadCommand cmd(command_kind_from_code(grid.rows[i][0]));
        for (int s = 0; s < kNumParamSlots; ++s) {
            if (slot_used(cmd.kind, s)) {
                cmd.p[s] = dequantize_value(grid.rows[i][s + 1], s);
            }
        }
        seq.cmds.push_back(cmd);
    }
    return seq;
}

TokenGrid tokenize(const CadModel& model) {
    CadModel m = model;
    const double k = normalize_model_in_place(m);
    for (auto& pair : m.pairs) normalize_pair_profile_in_place(pair);
    TokenGrid grid = quantize_sequence(flatten(m));
    grid.model_scale = k;
    return grid;
}

CadModel detokenize(const TokenGrid& grid) {
    CadModel model = parse(dequantize_grid(grid));
    if (grid.model_scale != 1.0) {
        const double inv = 1.0 / grid.model_scale;
        for (auto& pair : model.pairs) {
            auto& e = pair.extrude;
            e.origin = e.origin * inv;
            e.scale *= inv;
            e.e1 *= inv;
            e.e2 *= inv;
        }
    }
    return model;
}

void write_grids(const std::string& path, const std::vector<TokenGrid>& grids) {
    std::ofstream out(path);
    if (!out) throw CadError(ErrorCode::IoError, "cannot open " + path);
    for (std::size_t g = 0; g < grids.size(); ++g) {
        if (g) out << "\n";
        for (const auto& row : grids[g].rows) {
            for (int c = 0; c <= kNumParamSlots; ++c) {
                if (c) out << ",";
                out << row[c];
            }
            out << "\n";
        }
    }
}

std::vector<TokenGrid> read_grids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CadError(ErrorCode::IoError, "cannot open " + path);
    std::vector<TokenGrid> grids;
    TokenGrid current;
    int row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row == 0) current = TokenGrid{};
        std::istringstream ls(line);
        std::string cell;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col > kNumParamSlots)
                throw CadError(ErrorCode::IoError, "grid row has too many columns");
            current.rows[row][col] = std::stoi(cell);
            ++col;
        }
        if (col != kNumParamSlots + 1)
            throw CadError(ErrorCode::IoError, "grid row has " + std::to_string(col) +
                                                   " columns, expected 17");
        if (++row == kMaxCommands) {
            grids.push_back(current);
            row = 0;
        }
    }
    if (row != 0) throw CadError(ErrorCode::IoError, "truncated grid record");
    return grids;
}

}  // namespace cadseq
