#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "cadseq/geometry.hpp"
#include "cadseq/rng.hpp"
#include "doctest.h"

using namespace cadseq;

namespace {
constexpr double kPi = 3.14159265358979323846;

// unit square profile in normalized coordinates (about (0.5, 0.5))
Profile unit_square_profile() {
    Loop loop;
    loop.start = {0.0, 0.0};
    loop.curves.push_back(LineCurve{{1.0, 0.0}});
    loop.curves.push_back(LineCurve{{1.0, 1.0}});
    loop.curves.push_back(LineCurve{{0.0, 1.0}});
    loop.curves.push_back(LineCurve{{0.0, 0.0}});
    return {loop};
}

// cube [0,1]^3: square spans +-0.5 about origin after centering, shifted +0.5
CadModel unit_cube_model() {
    CadModel m;
    SketchExtrudePair pair;
    pair.profile = unit_square_profile();
    auto& e = pair.extrude;
    e.origin = {0.5, 0.5, 0.0};
    e.scale = 1.0;
    e.e1 = 1.0;
    e.extent = ExtentKind::OneSided;
    m.pairs.push_back(pair);
    return m;
}

CadModel cube_cut_cube() {
    CadModel m = unit_cube_model();
    SketchExtrudePair cut;
    cut.profile = unit_square_profile();
    auto& e = cut.extrude;
    e.origin = {0.25, 0.25, 0.0};
    e.scale = 0.5;
    e.e1 = 0.5;
    e.extent = ExtentKind::OneSided;
    e.op = BooleanOp::Cut;
    m.pairs.push_back(cut);
    return m;
}

CadModel cylinder_model(double r, double h) {
    CadModel m;
    SketchExtrudePair pair;
    Loop loop;
    loop.curves.push_back(CircleCurve{{0.5, 0.5}, 0.5});
    loop.start = {0.0, 0.5};
    pair.profile = {loop};
    auto& e = pair.extrude;
    e.origin = {0.0, 0.0, 0.0};
    e.scale = 2.0 * r;
    e.e1 = h;
    e.extent = ExtentKind::OneSided;
    m.pairs.push_back(pair);
    return m;
}

}  // namespace

TEST_CASE("plane frames are orthonormal and right-handed") {
    CHECK(plane_frame(0, 0, 0, {}).normal.z == doctest::Approx(1.0));
    const PlaneFrame px = plane_frame(kPi / 2, 0, 0, {});
    CHECK(px.normal.x == doctest::Approx(1.0));
    CHECK(px.normal.y == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(31337);
    for (int trial = 0; trial < 100000; ++trial) {
        const double theta = rng.uniform(-kPi, kPi);
        const double phi = rng.uniform(-kPi, kPi);
        const double gamma = rng.uniform(-kPi, kPi);
        const PlaneFrame f = plane_frame(theta, phi, gamma, {});
        CHECK(std::abs(norm(f.u_axis) - 1.0) < 1e-9);
        CHECK(std::abs(norm(f.v_axis) - 1.0) < 1e-9);
        CHECK(std::abs(norm(f.normal) - 1.0) < 1e-9);
        const Vec3 n = cross(f.u_axis, f.v_axis);
        CHECK(std::abs(n.x - f.normal.x) < 1e-9);
        CHECK(std::abs(n.y - f.normal.y) < 1e-9);
        CHECK(std::abs(n.z - f.normal.z) < 1e-9);
    }
}

TEST_CASE("arc construction and tessellation") {
    // quarter arc: center (1,1), radius sqrt(2)
    const ArcGeometry g = arc_geometry({0, 0}, {2, 0}, kPi / 2, true);
    CHECK(g.center.x == doctest::Approx(1.0));
    CHECK(g.center.y == doctest::Approx(1.0));
    CHECK(g.radius == doctest::Approx(std::sqrt(2.0)));

    // semicircle: center at the chord midpoint
    const ArcGeometry s = arc_geometry({0, 0}, {2, 0}, kPi, true);
    CHECK(s.center.x == doctest::Approx(1.0));
    CHECK(s.center.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.radius == doctest::Approx(1.0));

    // rotating the start about the center by +-alpha reproduces the end
    Rng rng(4242);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec2 a{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec2 b{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        if (dist(a, b) < 1e-3) b.x += 0.2;
        const double sweep = rng.uniform(0.05, 2.0 * kPi - 0.05);
        const bool ccw = rng.chance(0.5);
        const ArcGeometry geom = arc_geometry(a, b, sweep, ccw);
        const Vec2 rotated = geom.center + rotate(a - geom.center, geom.signed_sweep);
        CHECK(dist(rotated, b) < 1e-9);
    }

    // circle tessellation: all vertices on the circle
    Loop circle;
    circle.curves.push_back(CircleCurve{{0.5, 0.5}, 0.25});
    circle.start = {0.25, 0.5};
    const Ring ring = tessellate_loop(circle);
    CHECK(ring.pts.size() == 256);
    for (const Vec2& p : ring.pts)
        CHECK(std::abs(dist(p, {0.5, 0.5}) - 0.25) < 1e-12);
}

TEST_CASE("profile containment uses the even-odd rule") {
    std::vector<Ring> rings;
    Loop square;
    square.start = {0.0, 0.0};
    square.curves.push_back(LineCurve{{1.0, 0.0}});
    square.curves.push_back(LineCurve{{1.0, 1.0}});
    square.curves.push_back(LineCurve{{0.0, 1.0}});
    square.curves.push_back(LineCurve{{0.0, 0.0}});
    rings.push_back(tessellate_loop(square));
    CHECK(profile_contains(rings, {0.5, 0.5}) == Containment::Inside);
    CHECK(profile_contains(rings, {2.0, 2.0}) == Containment::Outside);
    CHECK(profile_contains(rings, {0.0, 0.5}) == Containment::Boundary);

    Loop hole;
    hole.curves.push_back(CircleCurve{{0.5, 0.5}, 0.2});
    hole.start = {0.3, 0.5};
    rings.push_back(tessellate_loop(hole));
    CHECK(profile_contains(rings, {0.5, 0.5}) == Containment::Outside);  // inside the hole
    CHECK(profile_contains(rings, {0.05, 0.05}) == Containment::Inside);
}

TEST_CASE("extrude depth intervals per extent kind") {
    const PlaneFrame frame = plane_frame(0, 0, 0, {});
    const Profile profile = unit_square_profile();
    const ExtrudedBody one = extrude(profile, frame, 1.0, 1.0, 0.0, ExtentKind::OneSided);
    CHECK(one.d_lo == doctest::Approx(0.0));
    CHECK(one.d_hi == doctest::Approx(1.0));
    const ExtrudedBody sym = extrude(profile, frame, 1.0, 1.0, 0.0, ExtentKind::Symmetric);
    CHECK(sym.d_lo == doctest::Approx(-0.5));
    CHECK(sym.d_hi == doctest::Approx(0.5));
    const ExtrudedBody two = extrude(profile, frame, 1.0, 0.7, 0.3, ExtentKind::TwoSided);
    CHECK(two.d_lo == doctest::Approx(-0.3));
    CHECK(two.d_hi == doctest::Approx(0.7));
    CHECK_THROWS_AS((void)extrude(profile, frame, 1.0, 0.0, 0.0, ExtentKind::OneSided), CadError);
}

TEST_CASE("membership folds booleans left to right") {
    const Solid solid = build_solid(cube_cut_cube());
    CHECK(membership(solid, {0.25, 0.25, 0.25}) == Membership::Outside);  // cut away
    CHECK(membership(solid, {0.75, 0.75, 0.75}) == Membership::Inside);
    CHECK(membership(solid, {1.5, 0.5, 0.5}) == Membership::Outside);

    // Join commutes and Cut(A, A) empties on sampled points
    CadModel join_ab = unit_cube_model();
    {
        SketchExtrudePair second = join_ab.pairs[0];
        second.extrude.origin = {0.75, 0.5, 0.5};
        second.extrude.scale = 0.5;
        second.extrude.e1 = 0.5;
        second.extrude.op = BooleanOp::Join;
        join_ab.pairs.push_back(second);
    }
    CadModel join_ba = join_ab;
    std::swap(join_ba.pairs[0], join_ba.pairs[1]);
    join_ba.pairs[0].extrude.op = BooleanOp::NewBody;
    join_ba.pairs[1].extrude.op = BooleanOp::Join;
    const Solid sab = build_solid(join_ab);
    const Solid sba = build_solid(join_ba);

    CadModel self_cut = unit_cube_model();
    {
        SketchExtrudePair cut = self_cut.pairs[0];
        cut.extrude.op = BooleanOp::Cut;
        self_cut.pairs.push_back(cut);
    }
    const Solid empty = build_solid(self_cut);

    CadModel self_intersect = unit_cube_model();
    {
        SketchExtrudePair keep = self_intersect.pairs[0];
        keep.extrude.op = BooleanOp::Intersect;
        self_intersect.pairs.push_back(keep);
    }
    const Solid same = build_solid(self_intersect);
    const Solid plain = build_solid(unit_cube_model());

    Rng rng(7);
    int disagreements = 0;
    for (int i = 0; i < 10000; ++i) {
        const Vec3 q{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
        if (membership(sab, q) != membership(sba, q)) ++disagreements;
        if (membership(empty, q) == Membership::Inside) ++disagreements;
        if (membership(same, q) != membership(plain, q)) ++disagreements;
    }
    CHECK(disagreements == 0);
}

TEST_CASE("volume oracle: cube, cut cube, cylinder") {
    const VolumeEstimate cube = estimate_volume(build_solid(unit_cube_model()), 50000, 11);
    CHECK(std::abs(cube.volume - 1.0) < 3.0 * std::max(cube.std_error, 1e-6) + 1e-9);

    const VolumeEstimate cut = estimate_volume(build_solid(cube_cut_cube()), 50000, 12);
    CHECK(std::abs(cut.volume - 0.875) < 3.0 * cut.std_error);

    const VolumeEstimate cyl = estimate_volume(build_solid(cylinder_model(0.5, 1.0)), 50000, 13);
    CHECK(std::abs(cyl.volume - kPi / 4.0) < 3.0 * cyl.std_error);

    // scaling by k scales volume by k^3
    CadModel scaled = cylinder_model(0.5, 1.0);
    scaled.pairs[0].extrude.scale *= 0.5;
    scaled.pairs[0].extrude.e1 *= 0.5;
    const VolumeEstimate small = estimate_volume(build_solid(scaled), 50000, 14);
    CHECK(std::abs(small.volume - kPi / 32.0) < 3.0 * small.std_error);
}

TEST_CASE("surface sampling: boundary, determinism, face balance, holes") {
    const Solid cube = build_solid(unit_cube_model());
    const PointCloud cloud = sample_surface(cube, 2000, 99);
    REQUIRE(cloud.points.size() == 2000);

    std::map<int, int> face_counts;
    for (const Vec3& p : cloud.points) {
        const double d[6] = {std::abs(p.x),     std::abs(p.x - 1), std::abs(p.y),
                             std::abs(p.y - 1), std::abs(p.z),     std::abs(p.z - 1)};
        int face = 0;
        double best = d[0];
        for (int f = 1; f < 6; ++f) {
            if (d[f] < best) {
                best = d[f];
                face = f;
            }
        }
        CHECK(best < 1e-6);  // on the cube boundary
        face_counts[face] += 1;
    }
    // all faces have equal area: chi^2 with 5 dof at p > 0.01 is 15.086
    double chi2 = 0.0;
    for (int f = 0; f < 6; ++f) {
        const double expected = 2000.0 / 6.0;
        const double diff = face_counts[f] - expected;
        chi2 += diff * diff / expected;
    }
    CHECK(chi2 < 15.086);

    const PointCloud again = sample_surface(cube, 2000, 99);
    CHECK(cloud.points.size() == again.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        CHECK(cloud.points[i].x == again.points[i].x);
        CHECK(cloud.points[i].y == again.points[i].y);
        CHECK(cloud.points[i].z == again.points[i].z);
    }

    // through-hole: no kept point inside the removed volume
    CadModel pierced = unit_cube_model();
    {
        SketchExtrudePair hole;
        Loop circle;
        circle.curves.push_back(CircleCurve{{0.5, 0.5}, 0.5});
        circle.start = {0.0, 0.5};
        hole.profile = {circle};
        auto& e = hole.extrude;
        e.origin = {0.5, 0.5, -0.5};
        e.scale = 0.4;
        e.e1 = 2.0;
        e.extent = ExtentKind::OneSided;
        e.op = BooleanOp::Cut;
        pierced.pairs.push_back(hole);
    }
    const Solid drilled = build_solid(pierced);
    const PointCloud dcloud = sample_surface(drilled, 1000, 5);
    for (const Vec3& p : dcloud.points) {
        const double rr = (p.x - 0.5) * (p.x - 0.5) + (p.y - 0.5) * (p.y - 0.5);
        CHECK(rr > 0.0399);  // tessellated bore wall: radius shrinks by the chord sag
    }
}

TEST_CASE("check_solid_valid accepts good models and rejects broken ones") {
    CHECK(check_solid_valid(unit_cube_model(), 500, 1));

    CadModel open;
    {
        SketchExtrudePair pair;
        Loop loop;
        loop.start = {0.0, 0.0};
        loop.curves.push_back(LineCurve{{1.0, 0.0}});
        loop.curves.push_back(LineCurve{{1.0, 1.0}});
        pair.profile = {loop};
        pair.extrude.e1 = 0.5;
        open.pairs.push_back(pair);
    }
    CHECK(!check_solid_valid(open, 500, 1));

    // cut that removes the whole solid: no boundary survives
    CadModel gone = unit_cube_model();
    {
        SketchExtrudePair cut = gone.pairs[0];
        cut.extrude.op = BooleanOp::Cut;
        cut.extrude.scale = 2.0;   // generous cover
        cut.extrude.e1 = 3.0;
        cut.extrude.origin = {0.5, 0.5, -1.0};
        gone.pairs.push_back(cut);
    }
    CHECK(!check_solid_valid(gone, 500, 1));
}

TEST_CASE("exports write non-empty files") {
    const Solid solid = build_solid(cube_cut_cube());
    write_obj(solid, "test_export.obj");
    const PointCloud cloud = sample_surface(solid, 200, 3);
    write_ply(cloud, "test_export.ply");
    write_xyz(cloud, "test_export.xyz");
    std::ifstream obj("test_export.obj");
    std::string line;
    int vertices = 0, faces = 0;
    while (std::getline(obj, line)) {
        if (line.rfind("v ", 0) == 0) ++vertices;
        if (line.rfind("f ", 0) == 0) ++faces;
    }
    CHECK(vertices > 0);
    CHECK(faces > 0);
    std::ifstream ply("test_export.ply");
    std::getline(ply, line);
    CHECK(line == "ply");
    std::remove("test_export.obj");
    std::remove("test_export.ply");
    std::remove("test_export.xyz");
}
