// Sketch-plane frames, curve tessellation, profile membership and the
// sampling-level CSG solid.

#include <algorithm>
#include <cmath>

#include "cadseq/geometry.hpp"

namespace cadseq {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

PlaneFrame plane_frame(double theta, double phi, double gamma, Vec3 origin) {
    const Vec3 n{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                 std::cos(theta)};
    // reference axis for the in-plane base; world-z degenerates at the poles
    const Vec3 a = (std::abs(n.z) > 1.0 - 1e-6) ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    const Vec3 u0 = normalized(cross(a, n));
    // rotate u0 about n by gamma (Rodrigues; n is unit)
    const double c = std::cos(gamma), s = std::sin(gamma);
    const Vec3 u = u0 * c + cross(n, u0) * s + n * (dot(n, u0) * (1.0 - c));
    const Vec3 v = cross(n, u);
    return {origin, u, v, n};
}

ArcGeometry arc_geometry(Vec2 start, Vec2 end, double sweep, bool ccw) {
    const Vec2 chord = end - start;
    const double chord_len = norm(chord);
    if (chord_len < 1e-12)
        throw CadError(ErrorCode::DegenerateArc, "arc endpoints coincide");
    if (sweep <= 1e-12 || sweep > 2.0 * kPi + 1e-9)
        throw CadError(ErrorCode::DegenerateArc, "arc sweep out of (0, 2*pi]");

    const Vec2 mid = (start + end) * 0.5;
    const Vec2 cdir = chord / chord_len;
    const double half = chord_len * 0.5;
    const double h = half / std::tan(sweep * 0.5);
    const double radius = half / std::sin(sweep * 0.5);
    const Vec2 n_hat = ccw ? Vec2{-cdir.y, cdir.x} : Vec2{cdir.y, -cdir.x};
    const Vec2 center = mid + n_hat * h;
    const double start_angle = std::atan2(start.y - center.y, start.x - center.x);
    return {center, std::abs(radius), start_angle, ccw ? sweep : -sweep};
}

namespace {

void append_arc(std::vector<Vec2>& pts, Vec2 start, const ArcCurve& arc, int segments) {
    if (norm(arc.end - start) < 1e-12 && std::abs(arc.sweep - 2.0 * kPi) <= 1e-9) {
        // full-turn arc with coincident endpoints: center is underdetermined,
        // treat as a no-op ring point
        pts.push_back(arc.end);
        return;
    }
    const ArcGeometry g = arc_geometry(start, arc.end, arc.sweep, arc.ccw);
    for (int k = 1; k < segments; ++k) {
        const double a = g.start_angle + g.signed_sweep * (static_cast<double>(k) / segments);
        pts.push_back({g.center.x + g.radius * std::cos(a), g.center.y + g.radius * std::sin(a)});
    }
    pts.push_back(arc.end);
}

}  // namespace

Ring tessellate_loop(const Loop& loop, int segments_per_curve) {
    Ring ring;
    if (loop.curves.empty())
        throw CadError(ErrorCode::DegenerateProfile, "loop has no curves");

    if (loop.is_circle()) {
        const auto& c = std::get<CircleCurve>(loop.curves[0]);
        if (c.radius <= 1e-12)
            throw CadError(ErrorCode::DegenerateCurve, "circle with zero radius");
        const int n = 4 * segments_per_curve;
        ring.pts.reserve(n);
        for (int k = 0; k < n; ++k) {
            // counter-clockwise from the leftmost point (the loop start)
            const double a = kPi + 2.0 * kPi * (static_cast<double>(k) / n);
            ring.pts.push_back({c.center.x + c.radius * std::cos(a),
                                c.center.y + c.radius * std::sin(a)});
        }
        return ring;
    }

    Vec2 cursor = loop.start;
    ring.pts.push_back(cursor);
    for (const auto& curve : loop.curves) {
        if (std::holds_alternative<CircleCurve>(curve))
            throw CadError(ErrorCode::DegenerateCurve, "circle inside a multi-curve loop");
        if (const auto* line = std::get_if<LineCurve>(&curve)) {
            ring.pts.push_back(line->end);
            cursor = line->end;
        } else {
            const auto& arc = std::get<ArcCurve>(curve);
            append_arc(ring.pts, cursor, arc, segments_per_curve);
            cursor = arc.end;
        }
    }
    if (dist(ring.pts.front(), ring.pts.back()) > kLoopCloseTol)
        throw CadError(ErrorCode::OpenLoop, "loop chain does not close");
    ring.pts.pop_back();  // implicit closing edge
    return ring;
}

double ring_signed_area(const Ring& ring) {
    double acc = 0.0;
    const std::size_t n = ring.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring.pts[i];
        const Vec2 b = ring.pts[(i + 1) % n];
        acc += cross(a, b);
    }
    return 0.5 * acc;
}

Box2 ring_bbox(const Ring& ring) {
    Box2 box;
    for (const Vec2& p : ring.pts) box.expand(p);
    return box;
}

namespace {

double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return dist(p, a + ab * t);
}

// Parity of ray crossings for one ring; the bbox prefilter handles the
// common all-outside case cheaply.
bool ring_crossing_parity(const Ring& ring, const Box2& box, Vec2 p) {
    if (p.y < box.lo.y || p.y > box.hi.y || p.x > box.hi.x) return false;
    if (p.x < box.lo.x) {
        // every crossing of the horizontal line lies right of p; a closed
        // curve crosses it an even number of times, so parity is unchanged
        return false;
    }
    bool odd = false;
    const std::size_t n = ring.pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = ring.pts[i];
        const Vec2 b = ring.pts[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) odd = !odd;
        }
    }
    return odd;
}

}  // namespace

bool ring_contains(const Ring& ring, Vec2 p) {
    return ring_crossing_parity(ring, ring_bbox(ring), p);
}

Containment profile_contains(const std::vector<Ring>& rings, Vec2 p) {
    bool odd = false;
    for (const Ring& ring : rings) {
        const Box2 box = ring_bbox(ring);
        if (p.x >= box.lo.x - kBoundaryTol && p.x <= box.hi.x + kBoundaryTol &&
            p.y >= box.lo.y - kBoundaryTol && p.y <= box.hi.y + kBoundaryTol) {
            const std::size_t n = ring.pts.size();
            for (std::size_t i = 0; i < n; ++i) {
                if (point_segment_dist(p, ring.pts[i], ring.pts[(i + 1) % n]) < kBoundaryTol)
                    return Containment::Boundary;
            }
        }
        if (ring_crossing_parity(ring, box, p)) odd = !odd;
    }
    return odd ? Containment::Inside : Containment::Outside;
}

namespace {

// Even-odd nesting parity: a ring is a hole boundary when it lies inside an
// odd number of other rings.
std::vector<bool> ring_parities(const std::vector<Ring>& rings) {
    std::vector<Box2> boxes;
    boxes.reserve(rings.size());
    for (const Ring& r : rings) boxes.push_back(ring_bbox(r));

    std::vector<bool> hole(rings.size(), false);
    for (std::size_t i = 0; i < rings.size(); ++i) {
        int depth = 0;
        const Vec2 rep = rings[i].pts.front();
        for (std::size_t j = 0; j < rings.size(); ++j) {
            if (j == i) continue;
            if (ring_crossing_parity(rings[j], boxes[j], rep)) ++depth;
        }
        hole[i] = (depth % 2) == 1;
    }
    return hole;
}

}  // namespace

ExtrudedBody extrude(const Profile& profile, const PlaneFrame& frame, double scale, double e1,
                     double e2, ExtentKind extent, BooleanOp op, int segments_per_curve) {
    ExtrudedBody body;
    body.frame = frame;
    body.op = op;

    const Vec2 c{0.5, 0.5};
    for (const Loop& loop : profile) {
        Ring ring = tessellate_loop(loop, segments_per_curve);
        for (Vec2& p : ring.pts) p = (p - c) * scale;
        body.rings.push_back(std::move(ring));
    }
    body.ring_is_hole = ring_parities(body.rings);

    double lo = 0.0, hi = 0.0;
    switch (extent) {
        case ExtentKind::OneSided: lo = 0.0; hi = e1; break;
        case ExtentKind::Symmetric: lo = -e1 * 0.5; hi = e1 * 0.5; break;
        case ExtentKind::TwoSided: lo = -e2; hi = e1; break;
    }
    if (lo > hi) std::swap(lo, hi);
    if (hi - lo < 1e-12)
        throw CadError(ErrorCode::ZeroDepth, "extrusion depth interval is empty");
    body.d_lo = lo;
    body.d_hi = hi;
    return body;
}

namespace {

Box3 body_bbox(const ExtrudedBody& b) {
    Box3 box;
    for (const Ring& ring : b.rings) {
        for (const Vec2& p : ring.pts) {
            // world x/y/z are linear in depth, so the caps bound the walls
            box.expand(b.frame.to_world(p, b.d_lo));
            box.expand(b.frame.to_world(p, b.d_hi));
        }
    }
    return box;
}

bool adds_material(BooleanOp op) {
    return op == BooleanOp::NewBody || op == BooleanOp::Join;
}

}  // namespace

Solid build_solid(const CadModel& model, int segments_per_curve) {
    if (model.pairs.empty())
        throw CadError(ErrorCode::EmptyGeometry, "model has no sketch-extrude pairs");
    Solid solid;
    for (const auto& pair : model.pairs) {
        const auto& e = pair.extrude;
        const PlaneFrame frame = plane_frame(e.theta, e.phi, e.gamma, e.origin);
        solid.bodies.push_back(
            extrude(pair.profile, frame, e.scale, e.e1, e.e2, e.extent, e.op, segments_per_curve));
        if (adds_material(e.op)) solid.bbox.expand(body_bbox(solid.bodies.back()));
    }
    if (solid.bbox.empty())
        throw CadError(ErrorCode::EmptyGeometry, "no material-adding body");
    return solid;
}

namespace {

bool body_contains(const ExtrudedBody& b, Vec3 q) {
    const Vec3 local = q - b.frame.origin;
    const double depth = dot(local, b.frame.normal);
    if (depth < b.d_lo || depth > b.d_hi) return false;
    const Vec2 p{dot(local, b.frame.u_axis), dot(local, b.frame.v_axis)};
    return profile_contains(b.rings, p) != Containment::Outside;
}

}  // namespace

Membership membership(const Solid& solid, Vec3 q) {
    bool in = false;
    for (const ExtrudedBody& b : solid.bodies) {
        switch (b.op) {
            case BooleanOp::NewBody:
            case BooleanOp::Join:
                in = in || body_contains(b, q);
                break;
            case BooleanOp::Cut:
                in = in && !body_contains(b, q);
                break;
            case BooleanOp::Intersect:
                in = in && body_contains(b, q);
                break;
        }
    }
    return in ? Membership::Inside : Membership::Outside;
}

Box3 model_bbox(const CadModel& model) {
    const Solid solid = build_solid(model);
    if (solid.bbox.empty() || solid.bbox.max_extent() <= 1e-12 ||
        !std::isfinite(solid.bbox.max_extent()))
        throw CadError(ErrorCode::EmptyGeometry, "degenerate model bounding box");
    return solid.bbox;
}

}  // namespace cadseq
