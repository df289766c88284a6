#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cadseq/command.hpp"
#include "cadseq/model.hpp"

namespace cadseq {

constexpr int kQuantLevels = 256;

struct SlotRange {
    const char* name;
    double lo;
    double hi;
    bool discrete;   // f, b, u carry raw codes through quantization
    int max_code;    // inclusive, for discrete slots
};

// Compile-time parameter range table (normalized model space).
const std::array<SlotRange, kNumParamSlots>& param_ranges();

std::string ranges_to_json();

// level = clamp(round((v - lo) / (hi - lo) * 255), 0, 255),
// round-half-away-from-zero. Values within 1e-9 outside the range clamp;
// anything farther raises OutOfRange. Discrete slots pass through unchanged.
int quantize_value(double v, int slot);
double dequantize_value(int level, int slot);

// Flat integer form: 60 rows x (1 kind + 16 slots); -1 marks unused slots.
struct TokenGrid {
    std::array<std::array<int, kNumParamSlots + 1>, kMaxCommands> rows{};
    double model_scale = 1.0;  // normalization provenance

    TokenGrid() {
        for (auto& row : rows) {
            row[0] = static_cast<int>(CommandKind::Eos);
            for (int s = 1; s <= kNumParamSlots; ++s) row[s] = -1;
        }
    }

    bool same_cells(const TokenGrid& o) const { return rows == o.rows; }
};

// Uniform scale (no translation) putting the executed bounding box at max
// extent 2. Returns the applied factor; near-identity inputs snap to scale 1
// so quantization round-trips stay exact fixed points. Pass
// snap_near_identity = false to force the exact scale.
double normalize_model_in_place(CadModel& model, bool snap_near_identity = true);

inline std::pair<CadModel, double> normalize_model(const CadModel& model) {
    CadModel m = model;
    const double k = normalize_model_in_place(m);
    return {std::move(m), k};
}

// Profile coordinates scaled to bounding-box extent 1 with the bbox center at
// (0.5, 0.5); returns the restore scale s (the original bbox extent):
// original = (normalized - (0.5, 0.5)) * s + original_bbox_center.
std::pair<Profile, double> normalize_profile(const Profile& profile);

// World-geometry-preserving version used by the tokenize pipeline: folds the
// restore scale into the pair's s and shifts the plane origin so the executed
// shape is unchanged. Near-normalized profiles snap to identity.
void normalize_pair_profile_in_place(SketchExtrudePair& pair);

// quantize(flatten(normalize)); model must be canonical and valid.
TokenGrid tokenize(const CadModel& model);

// dequantize + parse; undoes the recorded model scale when present.
CadModel detokenize(const TokenGrid& grid);

// Direct conversions between the continuous sequence and the integer grid.
TokenGrid quantize_sequence(const CadSequence& seq);
CadSequence dequantize_grid(const TokenGrid& grid);

// Flat vector file: one model per record, 60 lines of 17 comma-separated
// integers, records separated by a blank line. Bit-exact round-trip.
void write_grids(const std::string& path, const std::vector<TokenGrid>& grids);
std::vector<TokenGrid> read_grids(const std::string& path);

}  // namespace cadseq
