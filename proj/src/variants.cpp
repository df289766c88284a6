// Alternative curve encodings: arc end+midpoint, and loop-relative positions.

#include <cmath>

#include "cadseq/geometry.hpp"
#include "cadseq/model.hpp"

namespace cadseq {

namespace {
constexpr double kPi = 3.14159265358979323846;

double wrap_positive(double angle) {
    const double two_pi = 2.0 * kPi;
    double a = std::fmod(angle, two_pi);
    if (a < 0) a += two_pi;
    return a;
}
}  // namespace

ArcMidpoint arc_to_midpoint(const ArcCurve& arc, Vec2 start) {
    const ArcGeometry g = arc_geometry(start, arc.end, arc.sweep, arc.ccw);
    const double mid_angle = g.start_angle + g.signed_sweep * 0.5;
    const Vec2 mid{g.center.x + g.radius * std::cos(mid_angle),
                   g.center.y + g.radius * std::sin(mid_angle)};
    return {arc.end, mid};
}

ArcCurve midpoint_to_arc(Vec2 start, Vec2 end, Vec2 mid) {
    // circumcenter of the three points
    const double d = 2.0 * (start.x * (mid.y - end.y) + mid.x * (end.y - start.y) +
                            end.x * (start.y - mid.y));
    const double span = std::max({dist(start, mid), dist(mid, end), dist(start, end)});
    if (std::abs(d) < 1e-12 * std::max(span * span, 1e-12))
        throw CadError(ErrorCode::DegenerateArc, "collinear start/mid/end");

    const double s2 = dot(start, start), m2 = dot(mid, mid), e2 = dot(end, end);
    const Vec2 center{(s2 * (mid.y - end.y) + m2 * (end.y - start.y) + e2 * (start.y - mid.y)) / d,
                      (s2 * (end.x - mid.x) + m2 * (start.x - end.x) + e2 * (mid.x - start.x)) / d};

    // mid lies on the arc, so its angular offset from start fixes the direction
    const double a_s = std::atan2(start.y - center.y, start.x - center.x);
    const double a_m = std::atan2(mid.y - center.y, mid.x - center.x);
    const double a_e = std::atan2(end.y - center.y, end.x - center.x);
    const bool ccw = wrap_positive(a_m - a_s) <= wrap_positive(a_e - a_s);
    const double sweep = ccw ? wrap_positive(a_e - a_s) : wrap_positive(a_s - a_e);
    return ArcCurve{end, sweep, ccw};
}

namespace {

template <bool ToRelative>
Loop convert_loop(const Loop& loop) {
    Loop out;
    out.start = loop.start;
    Vec2 cursor = loop.start;  // absolute position of the predecessor's end
    for (const Curve& c : loop.curves) {
        if (const auto* line = std::get_if<LineCurve>(&c)) {
            if constexpr (ToRelative) {
                out.curves.push_back(LineCurve{line->end - cursor});
                cursor = line->end;
            } else {
                const Vec2 abs_end = cursor + line->end;
                out.curves.push_back(LineCurve{abs_end});
                cursor = abs_end;
            }
        } else if (const auto* arc = std::get_if<ArcCurve>(&c)) {
            if constexpr (ToRelative) {
                out.curves.push_back(ArcCurve{arc->end - cursor, arc->sweep, arc->ccw});
                cursor = arc->end;
            } else {
                const Vec2 abs_end = cursor + arc->end;
                out.curves.push_back(ArcCurve{abs_end, arc->sweep, arc->ccw});
                cursor = abs_end;
            }
        } else {
            const auto& circle = std::get<CircleCurve>(c);
            if constexpr (ToRelative) {
                out.curves.push_back(CircleCurve{circle.center - cursor, circle.radius});
            } else {
                out.curves.push_back(CircleCurve{cursor + circle.center, circle.radius});
            }
            // a circle is a lone loop; the cursor is not advanced
        }
    }
    return out;
}

template <bool ToRelative>
CadModel convert_model(const CadModel& model) {
    CadModel out;
    out.pairs.reserve(model.pairs.size());
    for (const auto& pair : model.pairs) {
        SketchExtrudePair p;
        p.extrude = pair.extrude;
        for (const Loop& loop : pair.profile) p.profile.push_back(convert_loop<ToRelative>(loop));
        out.pairs.push_back(std::move(p));
    }
    return out;
}

}  // namespace

CadModel to_relative(const CadModel& model) { return convert_model<true>(model); }
CadModel to_absolute(const CadModel& model) { return convert_model<false>(model); }

}  // namespace cadseq
