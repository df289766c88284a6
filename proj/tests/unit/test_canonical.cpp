#include <cmath>

#include "cadseq/geometry.hpp"
#include "cadseq/model.hpp"
#include "cadseq/rng.hpp"
#include "doctest.h"

using namespace cadseq;

namespace {

Loop square_cw_from_11() {
    // axis-aligned unit square entered clockwise starting at (1,1)
    Loop loop;
    loop.start = {1.0, 1.0};
    loop.curves.push_back(LineCurve{{1.0, 0.0}});
    loop.curves.push_back(LineCurve{{0.0, 0.0}});
    loop.curves.push_back(LineCurve{{0.0, 1.0}});
    loop.curves.push_back(LineCurve{{1.0, 1.0}});
    return loop;
}

CadModel one_pair(Profile profile) {
    CadModel m;
    SketchExtrudePair pair;
    pair.profile = std::move(profile);
    pair.extrude.e1 = 0.5;
    m.pairs.push_back(std::move(pair));
    return m;
}

}  // namespace

TEST_CASE("canonicalize orients, rotates and is idempotent") {
    const CadModel model = one_pair({square_cw_from_11()});
    const CadModel canon = canonicalize(model);
    const Loop& loop = canon.pairs[0].profile[0];

    // counter-clockwise from (0,0)
    CHECK(loop.start.x == doctest::Approx(0.0));
    CHECK(loop.start.y == doctest::Approx(0.0));
    CHECK(ring_signed_area(tessellate_loop(loop)) > 0.0);
    CHECK(curve_end(loop.curves[0]).x == doctest::Approx(1.0));
    CHECK(curve_end(loop.curves[0]).y == doctest::Approx(0.0));

    const CadModel twice = canonicalize(canon);
    CHECK(models_close(twice, canon, 1e-12));
}

TEST_CASE("loops sort by bounding-box bottom-left corner") {
    Loop circle;
    circle.curves.push_back(CircleCurve{{0.8, 0.8}, 0.1});
    circle.start = circle_loop_start(std::get<CircleCurve>(circle.curves[0]));
    Loop square = square_cw_from_11();
    const CadModel canon = canonicalize(one_pair({circle, square}));
    REQUIRE(canon.pairs[0].profile.size() == 2);
    CHECK(!canon.pairs[0].profile[0].is_circle());  // square first: corner (0,0) < (0.7,0.8)
    CHECK(canon.pairs[0].profile[1].is_circle());
}

TEST_CASE("canonicalize preserves the vertex multiset") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        // random star-ish polygon (may be non-convex, stays simple)
        const int n = rng.uniform_int(3, 8);
        std::vector<Vec2> verts;
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * 3.14159265358979323846 * i / n;
            const double r = rng.uniform(0.3, 1.0);
            verts.push_back({r * std::cos(a), r * std::sin(a)});
        }
        if (rng.chance(0.5)) std::reverse(verts.begin(), verts.end());
        Loop loop;
        loop.start = verts[0];
        for (int i = 1; i < n; ++i) loop.curves.push_back(LineCurve{verts[i]});
        loop.curves.push_back(LineCurve{verts[0]});

        const CadModel canon = canonicalize(one_pair({loop}));
        const Loop& out = canon.pairs[0].profile[0];
        CHECK(out.curves.size() == loop.curves.size());
        CHECK(ring_signed_area(tessellate_loop(out)) > 0.0);

        // same vertex multiset
        std::vector<Vec2> out_verts{out.start};
        for (std::size_t i = 0; i + 1 < out.curves.size(); ++i)
            out_verts.push_back(curve_end(out.curves[i]));
        for (const Vec2& v : verts) {
            bool found = false;
            for (const Vec2& w : out_verts) {
                if (dist(v, w) < 1e-9) found = true;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("open loops are rejected") {
    Loop open;
    open.start = {0.0, 0.0};
    open.curves.push_back(LineCurve{{1.0, 0.0}});
    open.curves.push_back(LineCurve{{1.0, 1.0}});  // never returns to start
    CHECK_THROWS_AS((void)canonicalize(one_pair({open})), CadError);
    const ValidationReport report = validate(one_pair({open}));
    CHECK(!report.ok());
    CHECK(report.issues[0].code == "OpenLoop");
}

TEST_CASE("validate flags degenerate and intersecting profiles") {
    // zero-radius circle
    Loop bad_circle;
    bad_circle.curves.push_back(CircleCurve{{0.5, 0.5}, 0.0});
    bad_circle.start = {0.5, 0.5};
    {
        const ValidationReport r = validate(one_pair({bad_circle}));
        CHECK(!r.ok());
        bool found = false;
        for (const auto& issue : r.issues) found |= issue.code == "DegenerateCurve";
        CHECK(found);
    }

    // two overlapping triangles
    Loop tri1;
    tri1.start = {0.0, 0.0};
    tri1.curves.push_back(LineCurve{{1.0, 0.0}});
    tri1.curves.push_back(LineCurve{{0.5, 1.0}});
    tri1.curves.push_back(LineCurve{{0.0, 0.0}});
    Loop tri2;
    tri2.start = {0.2, 0.5};
    tri2.curves.push_back(LineCurve{{1.2, 0.5}});
    tri2.curves.push_back(LineCurve{{0.7, -0.5}});
    tri2.curves.push_back(LineCurve{{0.2, 0.5}});
    {
        const ValidationReport r = validate(one_pair({tri1, tri2}));
        CHECK(!r.ok());
        bool found = false;
        for (const auto& issue : r.issues) found |= issue.code == "SelfIntersectingProfile";
        CHECK(found);
    }

    // square with a concentric hole stays clean
    Loop hole;
    hole.curves.push_back(CircleCurve{{0.5, 0.5}, 0.2});
    hole.start = circle_loop_start(std::get<CircleCurve>(hole.curves[0]));
    CHECK(validate(one_pair({square_cw_from_11(), hole})).ok());

    // scale and boolean checks
    CadModel bad_scale = one_pair({square_cw_from_11()});
    bad_scale.pairs[0].extrude.scale = -1.0;
    {
        const ValidationReport r = validate(bad_scale);
        bool found = false;
        for (const auto& issue : r.issues) found |= issue.code == "BadScale";
        CHECK(found);
    }
    CadModel not_new = one_pair({square_cw_from_11()});
    not_new.pairs[0].extrude.scale = 1.0;
    not_new.pairs[0].extrude.op = BooleanOp::Cut;
    {
        const ValidationReport r = validate(not_new);
        bool found = false;
        for (const auto& issue : r.issues) found |= issue.code == "FirstBooleanNotNew";
        CHECK(found);
    }
    CadModel zero_depth = one_pair({square_cw_from_11()});
    zero_depth.pairs[0].extrude.e1 = 0.0;
    {
        const ValidationReport r = validate(zero_depth);
        bool found = false;
        for (const auto& issue : r.issues) found |= issue.code == "ZeroDepth";
        CHECK(found);
    }
}
