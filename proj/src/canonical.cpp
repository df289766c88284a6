// Canonical ordering and model validation.
//
// Canonical form: every chained loop runs counter-clockwise and starts at its
// bottom-left-most vertex (lexicographic (y, x), y primary); loops within a
// profile are sorted by the bottom-left corner of their bounding boxes.
// Lone circles are stored canonically by center/radius and are exempt from
// the start rotation.

#include <algorithm>
#include <cmath>

#include "cadseq/geometry.hpp"
#include "cadseq/model.hpp"

namespace cadseq {

namespace {

std::vector<Vec2> loop_vertices(const Loop& loop) {
    std::vector<Vec2> verts;
    verts.reserve(loop.curves.size());
    Vec2 cursor = loop.start;
    for (const Curve& c : loop.curves) {
        verts.push_back(cursor);
        cursor = curve_end(c);
    }
    return verts;
}

Curve reversed_curve(const Curve& c, Vec2 new_end) {
    if (std::holds_alternative<LineCurve>(c)) return LineCurve{new_end};
    const auto& arc = std::get<ArcCurve>(c);
    return ArcCurve{new_end, arc.sweep, !arc.ccw};
}

// Same point set traversed in the opposite direction; the start is kept.
Loop reversed_loop(const Loop& loop) {
    const std::vector<Vec2> verts = loop_vertices(loop);
    Loop out;
    out.start = loop.start;
    const std::size_t n = loop.curves.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = n - 1 - i;
        out.curves.push_back(reversed_curve(loop.curves[src], verts[src]));
    }
    return out;
}

Loop rotated_loop(const Loop& loop, std::size_t first) {
    const std::vector<Vec2> verts = loop_vertices(loop);
    Loop out;
    out.start = verts[first];
    const std::size_t n = loop.curves.size();
    for (std::size_t i = 0; i < n; ++i) out.curves.push_back(loop.curves[(first + i) % n]);
    return out;
}

void check_closed(const Loop& loop) {
    if (loop.is_circle()) return;
    Vec2 cursor = loop.start;
    for (const Curve& c : loop.curves) {
        if (std::holds_alternative<CircleCurve>(c))
            throw CadError(ErrorCode::OpenLoop, "circle breaks the curve chain");
        cursor = curve_end(c);
    }
    if (dist(cursor, loop.start) > kLoopCloseTol)
        throw CadError(ErrorCode::OpenLoop, "loop chain does not close");
}

Loop canonical_loop(const Loop& loop) {
    if (loop.is_circle()) {
        Loop out = loop;
        out.start = circle_loop_start(std::get<CircleCurve>(loop.curves[0]));
        return out;
    }
    check_closed(loop);

    Loop work = loop;
    if (ring_signed_area(tessellate_loop(work)) < 0.0) work = reversed_loop(work);

    const std::vector<Vec2> verts = loop_vertices(work);
    std::size_t best = 0;
    for (std::size_t i = 1; i < verts.size(); ++i) {
        if (verts[i].y < verts[best].y ||
            (verts[i].y == verts[best].y && verts[i].x < verts[best].x))
            best = i;
    }
    return rotated_loop(work, best);
}

Vec2 loop_bbox_corner(const Loop& loop) {
    const Box2 box = ring_bbox(tessellate_loop(loop));
    return box.lo;
}

// Proper segment intersection (interiors cross) or collinear overlap.
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        const double v = cross(b - a, c - a);
        if (v > 1e-12) return 1;
        if (v < -1e-12) return -1;
        return 0;
    };
    const int o1 = orient(p1, p2, q1);
    const int o2 = orient(p1, p2, q2);
    const int o3 = orient(q1, q2, p1);
    const int o4 = orient(q1, q2, p2);
    if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
    if (o1 == 0 && o2 == 0 && o3 == 0 && o4 == 0) {
        // collinear: overlapping extents count as an intersection
        const auto overlap = [](double a1, double a2, double b1, double b2) {
            if (a1 > a2) std::swap(a1, a2);
            if (b1 > b2) std::swap(b1, b2);
            return std::max(a1, b1) < std::min(a2, b2) - 1e-12;
        };
        return overlap(p1.x, p2.x, q1.x, q2.x) && overlap(p1.y, p2.y, q1.y, q2.y);
    }
    return false;
}

bool rings_self_intersect(const std::vector<Ring>& rings) {
    struct Seg {
        Vec2 a, b;
        int ring;
        int idx;
        Box2 box;
    };
    std::vector<Seg> segs;
    std::vector<int> ring_size;
    for (std::size_t ri = 0; ri < rings.size(); ++ri) {
        const std::size_t n = rings[ri].pts.size();
        ring_size.push_back(static_cast<int>(n));
        // a lone-circle tessellation cannot self-intersect; its segments only
        // matter against other rings
        for (std::size_t i = 0; i < n; ++i) {
            Seg s{rings[ri].pts[i], rings[ri].pts[(i + 1) % n], static_cast<int>(ri),
                  static_cast<int>(i), {}};
            s.box.expand(s.a);
            s.box.expand(s.b);
            segs.push_back(s);
        }
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            const Seg& s = segs[i];
            const Seg& t = segs[j];
            if (s.box.hi.x < t.box.lo.x || t.box.hi.x < s.box.lo.x ||
                s.box.hi.y < t.box.lo.y || t.box.hi.y < s.box.lo.y)
                continue;
            if (s.ring == t.ring) {
                const int n = ring_size[s.ring];
                const int d = std::abs(s.idx - t.idx);
                if (d <= 1 || d == n - 1) continue;  // adjacent segments share a vertex
            }
            if (segments_intersect(s.a, s.b, t.a, t.b)) return true;
        }
    }
    return false;
}

}  // namespace

CadModel canonicalize(const CadModel& model) {
    CadModel out;
    out.pairs.reserve(model.pairs.size());
    for (const auto& pair : model.pairs) {
        SketchExtrudePair p;
        p.extrude = pair.extrude;
        for (const Loop& loop : pair.profile) p.profile.push_back(canonical_loop(loop));
        std::stable_sort(p.profile.begin(), p.profile.end(), [](const Loop& a, const Loop& b) {
            const Vec2 ca = loop_bbox_corner(a);
            const Vec2 cb = loop_bbox_corner(b);
            if (ca.y != cb.y) return ca.y < cb.y;
            return ca.x < cb.x;
        });
        out.pairs.push_back(std::move(p));
    }
    return out;
}

ValidationReport validate(const CadModel& model) {
    ValidationReport report;
    long index = 0;
    const auto add = [&](const std::string& code, long idx, const std::string& msg) {
        report.issues.push_back({code, idx, msg});
    };

    if (model.pairs.empty()) {
        add("EmptyModel", 0, "model has no sketch-extrude pairs");
        return report;
    }

    for (std::size_t pi = 0; pi < model.pairs.size(); ++pi) {
        const auto& pair = model.pairs[pi];
        const std::size_t issues_before = report.issues.size();
        if (pair.profile.empty()) add("EmptyProfile", index, "profile has no loops");

        std::vector<Ring> rings;
        bool rings_ok = true;
        for (const Loop& loop : pair.profile) {
            const long sol_index = index;
            index += 1;  // SOL
            if (loop.curves.empty()) {
                add("EmptyProfile", sol_index, "loop has no curves");
                rings_ok = false;
                continue;
            }
            bool loop_has_circle = false;
            Vec2 cursor = loop.start;
            for (const Curve& c : loop.curves) {
                if (const auto* circle = std::get_if<CircleCurve>(&c)) {
                    loop_has_circle = true;
                    if (circle->radius <= 1e-12)
                        add("DegenerateCurve", index, "circle with zero radius");
                } else if (const auto* arc = std::get_if<ArcCurve>(&c)) {
                    if (arc->sweep <= 1e-12)
                        add("DegenerateCurve", index, "arc with zero sweep angle");
                    cursor = arc->end;
                } else {
                    cursor = std::get<LineCurve>(c).end;
                }
                index += 1;
            }
            if (loop_has_circle && loop.curves.size() > 1) {
                add("MixedCircleLoop", sol_index, "circle inside a multi-curve loop");
                rings_ok = false;
            } else if (!loop.is_circle() && dist(cursor, loop.start) > kLoopCloseTol) {
                add("OpenLoop", sol_index, "loop chain does not close");
                rings_ok = false;
            }
        }

        const auto& e = pair.extrude;
        const long extrude_index = index;
        index += 1;
        if (e.scale <= 0.0) add("BadScale", extrude_index, "profile scale s <= 0");
        {
            double lo = 0.0, hi = 0.0;
            switch (e.extent) {
                case ExtentKind::OneSided: hi = e.e1; break;
                case ExtentKind::Symmetric: lo = -e.e1 * 0.5; hi = e.e1 * 0.5; break;
                case ExtentKind::TwoSided: lo = -e.e2; hi = e.e1; break;
            }
            if (lo > hi) std::swap(lo, hi);
            if (hi - lo < 1e-12) add("ZeroDepth", extrude_index, "empty extrusion interval");
        }
        if (pi == 0 && e.op != BooleanOp::NewBody)
            add("FirstBooleanNotNew", extrude_index, "first pair must create a new body");

        if (rings_ok && report.issues.size() == issues_before) {
            try {
                for (const Loop& loop : pair.profile) rings.push_back(tessellate_loop(loop));
                if (rings_self_intersect(rings))
                    add("SelfIntersectingProfile", extrude_index,
                        "profile loops intersect each other");
            } catch (const CadError& err) {
                add(error_code_name(err.code()), extrude_index, err.what());
            }
        }
    }
    return report;
}

// --- structural comparison ----------------------------------------------------

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }
bool close(Vec2 a, Vec2 b, double tol) { return close(a.x, b.x, tol) && close(a.y, b.y, tol); }

bool curves_close(const Curve& a, const Curve& b, double tol) {
    if (a.index() != b.index()) return false;
    if (const auto* la = std::get_if<LineCurve>(&a))
        return close(la->end, std::get<LineCurve>(b).end, tol);
    if (const auto* aa = std::get_if<ArcCurve>(&a)) {
        const auto& ab = std::get<ArcCurve>(b);
        return close(aa->end, ab.end, tol) && close(aa->sweep, ab.sweep, tol) &&
               aa->ccw == ab.ccw;
    }
    const auto& ca = std::get<CircleCurve>(a);
    const auto& cb = std::get<CircleCurve>(b);
    return close(ca.center, cb.center, tol) && close(ca.radius, cb.radius, tol);
}

}  // namespace

bool models_close(const CadModel& a, const CadModel& b, double tol) {
    if (a.pairs.size() != b.pairs.size()) return false;
    for (std::size_t pi = 0; pi < a.pairs.size(); ++pi) {
        const auto& pa = a.pairs[pi];
        const auto& pb = b.pairs[pi];
        if (pa.profile.size() != pb.profile.size()) return false;
        for (std::size_t li = 0; li < pa.profile.size(); ++li) {
            const Loop& la = pa.profile[li];
            const Loop& lb = pb.profile[li];
            if (la.curves.size() != lb.curves.size()) return false;
            if (!close(la.start, lb.start, tol)) return false;
            for (std::size_t ci = 0; ci < la.curves.size(); ++ci) {
                if (!curves_close(la.curves[ci], lb.curves[ci], tol)) return false;
            }
        }
        const auto& ea = pa.extrude;
        const auto& eb = pb.extrude;
        if (!close(ea.theta, eb.theta, tol) || !close(ea.phi, eb.phi, tol) ||
            !close(ea.gamma, eb.gamma, tol))
            return false;
        if (!close(ea.origin.x, eb.origin.x, tol) || !close(ea.origin.y, eb.origin.y, tol) ||
            !close(ea.origin.z, eb.origin.z, tol))
            return false;
        if (!close(ea.scale, eb.scale, tol) || !close(ea.e1, eb.e1, tol) ||
            !close(ea.e2, eb.e2, tol))
            return false;
        if (ea.op != eb.op || ea.extent != eb.extent) return false;
    }
    return true;
}

}  // namespace cadseq
