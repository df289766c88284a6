#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cadseq/model.hpp"
#include "cadseq/vec.hpp"

namespace cadseq {

constexpr int kSegmentsPerCurve = 64;  // tessellation fidelity; circles get 4x

// Right-handed orthonormal frame of a sketch plane.
struct PlaneFrame {
    Vec3 origin;
    Vec3 u_axis, v_axis, normal;

    Vec3 to_world(Vec2 p, double depth) const {
        return origin + u_axis * p.x + v_axis * p.y + normal * depth;
    }
};

// normal n = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)); the in-plane
// axes come from a world-axis reference rotated about n by gamma.
PlaneFrame plane_frame(double theta, double phi, double gamma, Vec3 origin);

// Closed 2D polyline (implicit edge from back() to front()).
struct Ring {
    std::vector<Vec2> pts;
};

// Tessellates one loop; `start` overrides the loop's stored chain start when
// provided (used when walking an already-known chain).
Ring tessellate_loop(const Loop& loop, int segments_per_curve = kSegmentsPerCurve);

// Arc circle construction shared with the midpoint converter: center and
// radius of the arc from `start` to `end` sweeping `sweep` in direction `ccw`.
struct ArcGeometry {
    Vec2 center;
    double radius;
    double start_angle;  // angle of `start` about the center
    double signed_sweep; // +sweep for ccw, -sweep for cw
};
ArcGeometry arc_geometry(Vec2 start, Vec2 end, double sweep, bool ccw);

double ring_signed_area(const Ring& ring);
Box2 ring_bbox(const Ring& ring);

// Crossing parity of one ring (no boundary classification).
bool ring_contains(const Ring& ring, Vec2 p);

enum class Containment { Inside, Outside, Boundary };

constexpr double kBoundaryTol = 1e-9;

// Even-odd rule over all rings; Boundary within kBoundaryTol of any segment.
Containment profile_contains(const std::vector<Ring>& rings, Vec2 p);

// One extruded body of the CSG program. Rings are stored in body-local,
// already-scaled coordinates: world = frame.to_world(ring_pt, depth).
struct ExtrudedBody {
    PlaneFrame frame;
    std::vector<Ring> rings;
    std::vector<bool> ring_is_hole;  // even-odd nesting parity per ring
    double d_lo = 0.0, d_hi = 0.0;
    BooleanOp op = BooleanOp::NewBody;
};

// Maps a normalized profile (coordinates about (0.5, 0.5)) through the frame
// and scale and resolves the depth interval from the extent kind.
// Throws ZeroDepth when the interval is empty.
ExtrudedBody extrude(const Profile& profile, const PlaneFrame& frame, double scale, double e1,
                     double e2, ExtentKind extent, BooleanOp op = BooleanOp::NewBody,
                     int segments_per_curve = kSegmentsPerCurve);

struct Solid {
    std::vector<ExtrudedBody> bodies;
    Box3 bbox;  // bounds of the material-adding bodies (contains the result)
};

// Executes the whole model. Propagates geometry errors (degenerate curves,
// open loops, empty depth intervals).
Solid build_solid(const CadModel& model, int segments_per_curve = kSegmentsPerCurve);

enum class Membership { Inside, Outside };

// Left fold over the bodies: New/Join = OR, Cut = AND NOT, Intersect = AND.
Membership membership(const Solid& solid, Vec3 q);

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // optional; empty or same length as points
};

// Area-weighted boundary sampling with a two-sided membership filter; exactly
// n points, deterministic per seed. Throws EmptySolid when the boundary
// cannot be filled (empty or invalid result shape).
PointCloud sample_surface(const Solid& solid, int n = 2000, uint64_t seed = 0);

struct VolumeEstimate {
    double volume = 0.0;
    double std_error = 0.0;
};

VolumeEstimate estimate_volume(const Solid& solid, int n = 200000, uint64_t seed = 0);

// validate(model) passes and the surface sampler succeeds.
bool check_solid_valid(const CadModel& model, int sample_points = 2000, uint64_t seed = 0);

// Axis-aligned bounds of the executed geometry (same definition build_solid
// caches). Throws EmptyGeometry when degenerate.
Box3 model_bbox(const CadModel& model);

// --- exports (visualization only) -------------------------------------------

void write_obj(const Solid& solid, const std::string& path);
void write_ply(const PointCloud& cloud, const std::string& path);
void write_xyz(const PointCloud& cloud, const std::string& path);

}  // namespace cadseq
