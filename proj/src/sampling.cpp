// Boundary point sampling, Monte-Carlo volume and the solidity check.
//
// Candidates are drawn area-weighted on every body's boundary faces (cut and
// intersect bodies included: their walls can become real boundary of the
// result). A candidate survives iff exactly one of the two points offset
// along the face normal lies inside the full solid.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include "cadseq/geometry.hpp"
#include "cadseq/rng.hpp"

namespace cadseq {

namespace {

struct Face {
    enum Kind { CapLo, CapHi, Wall } kind;
    int body = 0;
    int ring = 0;
    int seg = 0;
    double area = 0.0;
};

double cap_area(const ExtrudedBody& b) {
    double area = 0.0;
    for (std::size_t i = 0; i < b.rings.size(); ++i) {
        const double a = std::abs(ring_signed_area(b.rings[i]));
        area += b.ring_is_hole[i] ? -a : a;
    }
    return std::max(area, 0.0);
}

std::vector<Face> enumerate_faces(const Solid& solid) {
    std::vector<Face> faces;
    for (std::size_t bi = 0; bi < solid.bodies.size(); ++bi) {
        const ExtrudedBody& b = solid.bodies[bi];
        const double cap = cap_area(b);
        if (cap > 0.0) {
            faces.push_back({Face::CapLo, static_cast<int>(bi), 0, 0, cap});
            faces.push_back({Face::CapHi, static_cast<int>(bi), 0, 0, cap});
        }
        const double depth = b.d_hi - b.d_lo;
        for (std::size_t ri = 0; ri < b.rings.size(); ++ri) {
            const Ring& ring = b.rings[ri];
            const std::size_t n = ring.pts.size();
            for (std::size_t si = 0; si < n; ++si) {
                const double len = dist(ring.pts[si], ring.pts[(si + 1) % n]);
                if (len <= 0.0) continue;
                faces.push_back({Face::Wall, static_cast<int>(bi), static_cast<int>(ri),
                                 static_cast<int>(si), len * depth});
            }
        }
    }
    return faces;
}

struct Candidate {
    Vec3 point;
    Vec3 normal;
    bool ok = false;
};

Candidate draw_candidate(const Solid& solid, const std::vector<Face>& faces,
                         const std::vector<double>& cumulative, Rng& rng) {
    Candidate out;
    const double pick = rng.uniform() * cumulative.back();
    const std::size_t fi =
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    const Face& face = faces[std::min(fi, faces.size() - 1)];
    const ExtrudedBody& b = solid.bodies[face.body];

    if (face.kind == Face::Wall) {
        const Ring& ring = b.rings[face.ring];
        const Vec2 a = ring.pts[face.seg];
        const Vec2 c = ring.pts[(face.seg + 1) % ring.pts.size()];
        const double t = rng.uniform();
        const double d = rng.uniform(b.d_lo, b.d_hi);
        const Vec2 p = a + (c - a) * t;
        const Vec2 dir = (c - a) / dist(a, c);
        const Vec2 n2{dir.y, -dir.x};  // sign is irrelevant to the keep test
        out.point = b.frame.to_world(p, d);
        out.normal = normalized(b.frame.u_axis * n2.x + b.frame.v_axis * n2.y);
        out.ok = true;
        return out;
    }

    // cap: rejection sample the even-odd region inside the profile bbox
    Box2 box;
    for (const Ring& r : b.rings) {
        for (const Vec2& p : r.pts) box.expand(p);
    }
    for (int attempt = 0; attempt < 256; ++attempt) {
        const Vec2 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y)};
        if (profile_contains(b.rings, p) == Containment::Inside) {
            const double d = (face.kind == Face::CapLo) ? b.d_lo : b.d_hi;
            out.point = b.frame.to_world(p, d);
            out.normal = b.frame.normal;
            out.ok = true;
            return out;
        }
    }
    return out;  // degenerate cap; wasted candidate
}

}  // namespace

PointCloud sample_surface(const Solid& solid, int n, uint64_t seed) {
    if (solid.bodies.empty())
        throw CadError(ErrorCode::EmptySolid, "solid has no bodies");
    if (n <= 0) return {};

    const std::vector<Face> faces = enumerate_faces(solid);
    std::vector<double> cumulative;
    cumulative.reserve(faces.size());
    double total = 0.0;
    for (const Face& f : faces) {
        total += f.area;
        cumulative.push_back(total);
    }
    if (faces.empty() || total <= 0.0)
        throw CadError(ErrorCode::EmptySolid, "solid has no boundary area");

    const double eps = 1e-4 * solid.bbox.diagonal();
    Rng rng(seed);
    PointCloud cloud;
    cloud.points.reserve(n);
    cloud.normals.reserve(n);

    for (int round = 0; round < 64; ++round) {
        for (int i = 0; i < 4 * n; ++i) {
            const Candidate cand = draw_candidate(solid, faces, cumulative, rng);
            if (!cand.ok) continue;
            const bool in_pos =
                membership(solid, cand.point + cand.normal * eps) == Membership::Inside;
            const bool in_neg =
                membership(solid, cand.point - cand.normal * eps) == Membership::Inside;
            if (in_pos != in_neg) {
                cloud.points.push_back(cand.point);
                cloud.normals.push_back(in_pos ? cand.normal * -1.0 : cand.normal);
                if (static_cast<int>(cloud.points.size()) == n) return cloud;
            }
        }
    }
    throw CadError(ErrorCode::EmptySolid,
                   "could not collect " + std::to_string(n) + " boundary points (kept " +
                       std::to_string(cloud.points.size()) + ")");
}

VolumeEstimate estimate_volume(const Solid& solid, int n, uint64_t seed) {
    Rng rng(seed);
    const Box3 box = solid.bbox;
    const double box_volume = box.volume();
    long inside = 0;
    for (int i = 0; i < n; ++i) {
        const Vec3 q{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
                     rng.uniform(box.lo.z, box.hi.z)};
        if (membership(solid, q) == Membership::Inside) ++inside;
    }
    const double frac = static_cast<double>(inside) / n;
    return {frac * box_volume, box_volume * std::sqrt(frac * (1.0 - frac) / n)};
}

bool check_solid_valid(const CadModel& model, int sample_points, uint64_t seed) {
    try {
        if (!validate(model).ok()) return false;
        const Solid solid = build_solid(model);
        (void)sample_surface(solid, sample_points, seed);
        return true;
    } catch (const CadError&) {
        return false;
    }
}

// --- exports ------------------------------------------------------------------

namespace {

// Ear clipping over a ccw polygon; holes have been bridged in beforehand.
std::vector<std::array<Vec2, 3>> ear_clip(std::vector<Vec2> poly) {
    std::vector<std::array<Vec2, 3>> tris;
    auto area2 = [](Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); };
    int guard = 0;
    while (poly.size() > 3 && guard < 100000) {
        ++guard;
        bool clipped = false;
        const std::size_t n = poly.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 a = poly[(i + n - 1) % n];
            const Vec2 b = poly[i];
            const Vec2 c = poly[(i + 1) % n];
            if (area2(a, b, c) <= 1e-14) continue;  // reflex or degenerate
            bool contains_other = false;
            for (std::size_t j = 0; j < n && !contains_other; ++j) {
                if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
                const Vec2 p = poly[j];
                if (area2(a, b, p) >= 0 && area2(b, c, p) >= 0 && area2(c, a, p) >= 0)
                    contains_other = true;
            }
            if (contains_other) continue;
            tris.push_back({a, b, c});
            poly.erase(poly.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) break;  // tolerate imperfect input; export is for viewing
    }
    if (poly.size() == 3) tris.push_back({poly[0], poly[1], poly[2]});
    return tris;
}

// Joins each hole ring into the outer ring through a bridge at the hole's
// rightmost vertex. Nearest outer vertex to the right is used; good enough
// for visualization.
std::vector<Vec2> bridge_holes(std::vector<Vec2> outer, std::vector<std::vector<Vec2>> holes) {
    std::sort(holes.begin(), holes.end(), [](const auto& a, const auto& b) {
        auto rightmost = [](const std::vector<Vec2>& ring) {
            double best = -1e300;
            for (const Vec2& p : ring) best = std::max(best, p.x);
            return best;
        };
        return rightmost(a) > rightmost(b);
    });
    for (auto& hole : holes) {
        std::size_t hi = 0;
        for (std::size_t i = 1; i < hole.size(); ++i) {
            if (hole[i].x > hole[hi].x) hi = i;
        }
        const Vec2 h = hole[hi];
        std::size_t oi = 0;
        double best = 1e300;
        for (std::size_t i = 0; i < outer.size(); ++i) {
            if (outer[i].x < h.x) continue;
            const double d = dist(outer[i], h);
            if (d < best) {
                best = d;
                oi = i;
            }
        }
        std::vector<Vec2> merged;
        merged.reserve(outer.size() + hole.size() + 2);
        merged.insert(merged.end(), outer.begin(), outer.begin() + static_cast<long>(oi) + 1);
        for (std::size_t k = 0; k <= hole.size(); ++k)
            merged.push_back(hole[(hi + k) % hole.size()]);
        merged.insert(merged.end(), outer.begin() + static_cast<long>(oi), outer.end());
        outer = std::move(merged);
    }
    return outer;
}

std::vector<std::array<Vec2, 3>> triangulate_cap(const ExtrudedBody& b) {
    // group each hole with the outer ring containing it, then triangulate
    // every outer region separately
    std::vector<std::size_t> outers;
    for (std::size_t i = 0; i < b.rings.size(); ++i) {
        if (!b.ring_is_hole[i]) outers.push_back(i);
    }
    std::vector<std::vector<std::vector<Vec2>>> holes_of(outers.size());
    for (std::size_t i = 0; i < b.rings.size(); ++i) {
        if (!b.ring_is_hole[i]) continue;
        std::vector<Vec2> pts = b.rings[i].pts;
        if (ring_signed_area(b.rings[i]) > 0) std::reverse(pts.begin(), pts.end());  // cw holes
        for (std::size_t o = 0; o < outers.size(); ++o) {
            if (ring_contains(b.rings[outers[o]], pts.front())) {
                holes_of[o].push_back(std::move(pts));
                break;
            }
        }
    }
    std::vector<std::array<Vec2, 3>> tris;
    for (std::size_t o = 0; o < outers.size(); ++o) {
        std::vector<Vec2> outer = b.rings[outers[o]].pts;
        if (ring_signed_area(b.rings[outers[o]]) < 0) std::reverse(outer.begin(), outer.end());
        auto part = ear_clip(bridge_holes(std::move(outer), std::move(holes_of[o])));
        tris.insert(tris.end(), part.begin(), part.end());
    }
    return tris;
}

}  // namespace

void write_obj(const Solid& solid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CadError(ErrorCode::IoError, "cannot open " + path);
    out.precision(12);
    std::vector<std::array<long, 3>> tris;
    long vertex_count = 0;
    auto emit_vertex = [&](Vec3 p) {
        out << "v " << p.x << " " << p.y << " " << p.z << "\n";
        return ++vertex_count;
    };

    for (const ExtrudedBody& b : solid.bodies) {
        // side walls: one quad (two triangles) per ring segment
        for (const Ring& ring : b.rings) {
            const std::size_t n = ring.pts.size();
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 a2 = ring.pts[i];
                const Vec2 b2 = ring.pts[(i + 1) % n];
                const long v0 = emit_vertex(b.frame.to_world(a2, b.d_lo));
                const long v1 = emit_vertex(b.frame.to_world(b2, b.d_lo));
                const long v2 = emit_vertex(b.frame.to_world(b2, b.d_hi));
                const long v3 = emit_vertex(b.frame.to_world(a2, b.d_hi));
                tris.push_back({v0, v1, v2});
                tris.push_back({v0, v2, v3});
            }
        }
        // caps
        for (const auto& tri : triangulate_cap(b)) {
            for (const double d : {b.d_lo, b.d_hi}) {
                const long v0 = emit_vertex(b.frame.to_world(tri[0], d));
                const long v1 = emit_vertex(b.frame.to_world(tri[1], d));
                const long v2 = emit_vertex(b.frame.to_world(tri[2], d));
                tris.push_back({v0, v1, v2});
            }
        }
    }
    for (const auto& t : tris) out << "f " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

void write_ply(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CadError(ErrorCode::IoError, "cannot open " + path);
    out.precision(12);
    const bool with_normals = cloud.normals.size() == cloud.points.size();
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size() << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    if (with_normals)
        out << "property double nx\nproperty double ny\nproperty double nz\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const Vec3& p = cloud.points[i];
        out << p.x << " " << p.y << " " << p.z;
        if (with_normals) {
            const Vec3& n = cloud.normals[i];
            out << " " << n.x << " " << n.y << " " << n.z;
        }
        out << "\n";
    }
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CadError(ErrorCode::IoError, "cannot open " + path);
    out.precision(12);
    for (const Vec3& p : cloud.points) out << p.x << " " << p.y << " " << p.z << "\n";
}

}  // namespace cadseq
