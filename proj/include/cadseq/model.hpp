#pragma once

#include <string>
#include <variant>
#include <vector>

#include "cadseq/command.hpp"
#include "cadseq/vec.hpp"

namespace cadseq {

// Boolean merge of an extruded body into the running solid.
enum class BooleanOp : int {
    NewBody = 0,
    Join = 1,
    Cut = 2,
    Intersect = 3,
};

enum class ExtentKind : int {
    OneSided = 0,
    Symmetric = 1,
    TwoSided = 2,
};

// Curves live in the profile-local 2D frame. Chain curves (lines, arcs)
// start at the end point of their predecessor; the containing Loop carries
// the chain's start point.
struct LineCurve {
    Vec2 end;
};

struct ArcCurve {
    Vec2 end;
    double sweep = 0.0;  // in (0, 2*pi]
    bool ccw = true;
};

struct CircleCurve {
    Vec2 center;
    double radius = 0.0;
};

using Curve = std::variant<LineCurve, ArcCurve, CircleCurve>;

struct Loop {
    Vec2 start;                 // chain start; for a lone circle, its leftmost point
    std::vector<Curve> curves;

    bool is_circle() const {
        return curves.size() == 1 && std::holds_alternative<CircleCurve>(curves[0]);
    }
};

// End point of a chain curve (undefined for circles; callers must not ask).
Vec2 curve_end(const Curve& c);

// Chain start point convention for a lone circle loop.
inline Vec2 circle_loop_start(const CircleCurve& c) { return {c.center.x - c.radius, c.center.y}; }

using Profile = std::vector<Loop>;

struct ExtrudeSpec {
    double theta = 0.0, phi = 0.0, gamma = 0.0;  // sketch plane orientation
    Vec3 origin;                                 // sketch plane origin (px, py, pz)
    double scale = 1.0;                          // profile restore scale s
    double e1 = 0.0, e2 = 0.0;                   // extrude distances toward both sides
    BooleanOp op = BooleanOp::NewBody;
    ExtentKind extent = ExtentKind::OneSided;
};

struct SketchExtrudePair {
    Profile profile;
    ExtrudeSpec extrude;
};

struct CadModel {
    std::vector<SketchExtrudePair> pairs;
};

struct ValidationIssue {
    std::string code;
    long command_index = -1;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// --- command_core operations ------------------------------------------------

// Grammар: ((SOL curve+)+ Extrude)+ EOS*, total length exactly kMaxCommands.
// Throws GrammarError with the offending command index.
CadModel parse(const CadSequence& seq);

// Inverse of parse up to canonical ordering; pads with EOS to kMaxCommands.
// Throws TooLong if the model emits more than kMaxCommands commands.
CadSequence flatten(const CadModel& model);

// Number of commands flatten would emit, without building the sequence.
std::size_t flat_command_count(const CadModel& model);

// Accepts iff `parse` would succeed; reports no error detail.
bool grammar_ok(const CadSequence& seq);

// Counter-clockwise orientation, loop start rotated to the bottom-left-most
// vertex (lexicographic (y, x)), loops sorted by bounding-box bottom-left
// corner. Idempotent. Throws OpenLoop if a chain does not close within
// kLoopCloseTol.
CadModel canonicalize(const CadModel& model);

constexpr double kLoopCloseTol = 1e-6;

ValidationReport validate(const CadModel& model);

// --- ablation-variant converters ---------------------------------------------

struct ArcMidpoint {
    Vec2 end;
    Vec2 mid;
};

// Arc <-> (end, mid) representation. Throws DegenerateArc for zero chords,
// zero sweeps and collinear triples.
ArcMidpoint arc_to_midpoint(const ArcCurve& arc, Vec2 start);
ArcCurve midpoint_to_arc(Vec2 start, Vec2 end, Vec2 mid);

// Curve positions re-expressed as deltas from the predecessor curve's end
// (the loop start for the first curve). Exact mutual inverses.
CadModel to_relative(const CadModel& model);
CadModel to_absolute(const CadModel& model);

// Structural + numeric equality within `tol` on every coordinate/parameter.
bool models_close(const CadModel& a, const CadModel& b, double tol);

inline Vec2 curve_end(const Curve& c) {
    if (const auto* l = std::get_if<LineCurve>(&c)) return l->end;
    if (const auto* a = std::get_if<ArcCurve>(&c)) return a->end;
    throw CadError(ErrorCode::DegenerateCurve, "circle has no chain end point");
}

}  // namespace cadseq
