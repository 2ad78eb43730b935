#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "stitchfold/errors.hpp"
#include "stitchfold/hinge.hpp"
#include "stitchfold/stitch.hpp"

using namespace stitchfold;

namespace {

LayoutFace mkface(int id, Poly poly) {
    LayoutFace f;
    f.id = id;
    f.poly = std::move(poly);
    f.sources.push_back({id, {}});
    return f;
}

Poly equilateral(double side, Vec2 base) {
    return {base, base + Vec2{side, 0}, base + Vec2{side / 2, side * std::sqrt(3.0) / 2}};
}

// base triangle plus its mirror across y = -sep/2, joined by one gap
FlatLayout mirror_pair(double side, double sep) {
    FlatLayout fl;
    Poly a = equilateral(side, {0, 0});
    Poly b = {{side, -sep}, {0, -sep}, {side / 2, -sep - side * std::sqrt(3.0) / 2}};
    fl.faces.push_back(mkface(0, a));
    fl.faces.push_back(mkface(1, b));
    EdgeGap g;
    g.id = 0;
    g.face_a = 0;
    g.face_b = 1;
    g.mesh_u = 0;
    g.mesh_v = 1;
    g.a_u = {0, 0};
    g.a_v = {side, 0};
    g.b_u = {0, -sep};
    g.b_v = {side, -sep};
    g.tree = true;
    g.gap_lo = sep;
    g.gap_hi = 1e9;
    fl.gaps.push_back(g);
    return fl;
}

int count_tag(const StitchProgram& prog, const char* tag) {
    int n = 0;
    for (const auto& r : prog.runs) n += r.tag == tag;
    return n;
}

}  // namespace

TEST_CASE("straight stretch subdivides at pitch") {
    auto pts = place_needle_points({{0, 0}, {10, 0}}, 2.5, 0.3, PointRole::channel);
    REQUIRE(pts.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(pts[i].pos.x == doctest::Approx(2.5 * i));
        CHECK(pts[i].pos.y == 0);
        CHECK(pts[i].role == PointRole::channel);
    }
}

TEST_CASE("every corner carries exactly three needle points") {
    auto pts = place_needle_points({{0, 0}, {10, 0}, {10, 10}}, 2.5, 0.3, PointRole::channel);
    int near_corner = 0;
    for (const auto& np : pts) near_corner += dist(np.pos, {10, 0}) < 0.7;
    CHECK(near_corner == 3);
    // apex plus one point 0.6mm down each arm
    bool apex = false, arm_a = false, arm_b = false;
    for (const auto& np : pts) {
        if (dist(np.pos, {10, 0}) < 1e-9) apex = true;
        if (dist(np.pos, {9.4, 0}) < 1e-9) arm_a = true;
        if (dist(np.pos, {10, 0.6}) < 1e-9) arm_b = true;
    }
    CHECK(apex);
    CHECK(arm_a);
    CHECK(arm_b);
}

TEST_CASE("cramped skeletons are rejected") {
    CHECK_THROWS_WITH_AS(place_needle_points({{0, 0}, {0.2, 0}}, 2.5, 0.3, PointRole::channel),
                         doctest::Contains("needs"), Error);
    // segment between two corners too short for both 0.6mm arms
    CHECK_THROWS_AS(
        place_needle_points({{0, 0}, {5, 0}, {6.3, 0}, {6.3, 5}}, 2.5, 0.3, PointRole::channel),
        Error);
    try {
        place_needle_points({{0, 0}, {0.2, 0}}, 2.5, 0.3, PointRole::channel);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind == "SpacingInfeasible");
        CHECK(e.cls == ErrClass::validation);
    }
}

TEST_CASE("fold pair zigzags straddle the crease and swap thread roles") {
    Params p;
    auto [anchor, shr] = fold_pair({0, 0}, {10, 0}, {0, 1}, true, 0.5, p);
    REQUIRE(anchor.points.size() == 5);
    REQUIRE(shr.points.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(anchor.points[i].pos == shr.points[i].pos);
        if (i % 2 == 0) {
            CHECK(anchor.points[i].pos.y == doctest::Approx(0.6));
            CHECK(anchor.points[i].role == PointRole::fold_top);
        } else {
            CHECK(anchor.points[i].pos.y == doctest::Approx(-0.5));
            CHECK(anchor.points[i].role == PointRole::fold_bobbin_anchor);
        }
    }
    CHECK(anchor.thread == ThreadRole::structural_top);
    CHECK(anchor.tension == Tension::pulled);
    CHECK(shr.thread == ThreadRole::shrink);
    CHECK(shr.tension == Tension::floating);

    auto [vanchor, vshr] = fold_pair({0, 0}, {10, 0}, {0, 1}, false, 0.5, p);
    CHECK(vanchor.thread == ThreadRole::structural_bobbin);
    CHECK(vshr.thread == ThreadRole::shrink);

    auto [e1, e2] = fold_pair({3, 3}, {3, 3}, {0, 1}, true, 0.5, p);
    CHECK(e1.points.empty());
    CHECK(e2.points.empty());
}

TEST_CASE("soluble holds reuse every other penetration of a straight run") {
    Params p;
    StitchRun shrink;
    shrink.id = 7;
    shrink.gap = 3;
    for (int i = 0; i <= 12; ++i) shrink.points.push_back({{2.5 * i, 0}, PointRole::channel});
    StitchRun hold = soluble_holds_for(shrink, p);
    REQUIRE(hold.points.size() == 7);
    for (int i = 0; i < 7; ++i) {
        CHECK(hold.points[i].pos.x == doctest::Approx(5.0 * i));
        CHECK(hold.points[i].role == PointRole::soluble_hold);
    }
    CHECK(hold.thread == ThreadRole::soluble_bobbin);
    CHECK(hold.tension == Tension::floating);
    CHECK(hold.gap == 3);
    CHECK(hold.pair == 7);
}

TEST_CASE("single hinge face carries one channel pair and two lock clusters") {
    Params p;
    FlatLayout fl = mirror_pair(16.0, 2.0);
    HingeSet hs = plan_hinges(fl, p);
    REQUIRE(hs.plans.size() == 1);
    REQUIRE(hs.plans[0].type == 1);

    StitchProgram prog = assemble_program(fl, hs, p);
    CHECK(count_tag(prog, "lock") == 4);      // two clusters per face
    CHECK(count_tag(prog, "channel") == 4);   // one row pair per face
    CHECK(count_tag(prog, "fold") == 4);      // zigzag pair per crease
    CHECK(count_tag(prog, "shrink") == 2);
    CHECK(count_tag(prog, "hold") == 1);

    for (const auto& r : prog.runs) {
        if (r.tag == "lock") {
            CHECK(r.points.size() == 9);
            CHECK(r.thread == ThreadRole::structural_top);
            CHECK(r.tension == Tension::pulled);
        }
        if (r.tag == "shrink") {
            CHECK(r.thread == ThreadRole::shrink);
            CHECK(r.tension == Tension::floating);  // never pulled
        }
    }

    // face 0 channel rows sit 1.2 and 1.8 inside the hinge edge; the inner row
    // is trimmed 3mm from the corners, the outer one deeper because its miter
    // with the neighboring 60-degree sides lies past that
    int inner = 0, outer = 0;
    for (const auto& r : prog.runs)
        if (r.tag == "channel" && r.face == 0) {
            double y = r.points.front().pos.y;
            double xmin = 1e9, xmax = -1e9;
            for (const auto& np : r.points) {
                CHECK(np.pos.y == doctest::Approx(y));
                xmin = std::min(xmin, np.pos.x);
                xmax = std::max(xmax, np.pos.x);
            }
            if (y < 1.5) {
                ++inner;
                CHECK(y == doctest::Approx(1.2));
                CHECK(xmin == doctest::Approx(3.0));
                CHECK(xmax == doctest::Approx(13.0));
            } else {
                ++outer;
                CHECK(y == doctest::Approx(1.8));
                double trim = 1.8 * std::tan(M_PI / 3) + 0.5;
                CHECK(xmin == doctest::Approx(trim));
                CHECK(xmax == doctest::Approx(16.0 - trim));
            }
        }
    CHECK(inner == 1);
    CHECK(outer == 1);

    // the shrink pair shares identical penetrations and crosses once
    const StitchRun *s1 = nullptr, *s2 = nullptr;
    for (const auto& r : prog.runs)
        if (r.tag == "shrink") (s1 ? s2 : s1) = &r;
    REQUIRE(s1);
    REQUIRE(s2);
    REQUIRE(s1->points.size() == s2->points.size());
    for (size_t i = 0; i < s1->points.size(); ++i) CHECK(s1->points[i].pos == s2->points[i].pos);
    CHECK(s1->pair == s2->id);
    CHECK(s2->pair == s1->id);

    // terminals stop short of the lock centers at both u-corners
    Vec2 first = s1->points.front().pos, last = s1->points.back().pos;
    CHECK(dist(first, {0, 0}) < 2.5);
    CHECK(dist(last, {0, -2}) < 2.5);
    CHECK(s1->points.front().role == PointRole::lock);

    // structural work precedes the shrink threads it anchors
    int shrink_id = s1->id;
    int found = 0;
    for (auto& [a, b] : prog.deps)
        if (b == shrink_id && prog.runs[a].tag != "fold") {
            CHECK((prog.runs[a].tag == "lock" || prog.runs[a].tag == "channel"));
            ++found;
        }
    CHECK(found == 8);

    check_spacing(prog, p.safety_margin);  // must not throw

    // fold zigzags: 0.6 into each face, band side clamped to 0.3 low bound at sep 2
    double band_lo = 1e9, face_hi = -1e9;
    for (const auto& r : prog.runs)
        if (r.tag == "fold" && r.thread == ThreadRole::structural_top)
            for (const auto& np : r.points)
                if (np.pos.y > -1.0) {  // crease a at y=0
                    band_lo = std::min(band_lo, np.pos.y);
                    face_hi = std::max(face_hi, np.pos.y);
                }
    CHECK(band_lo == doctest::Approx(-0.3));
    CHECK(face_hi == doctest::Approx(0.6));
}

TEST_CASE("minimum face edge is exactly fabricable") {
    Params p;
    FlatLayout ok = mirror_pair(8.4, 2.0);
    HingeSet hs_ok = plan_hinges(ok, p);
    StitchProgram prog = assemble_program(ok, hs_ok, p);
    check_spacing(prog, p.safety_margin);
    CHECK(prog.runs.size() > 0);

    FlatLayout bad = mirror_pair(8.3, 2.0);
    HingeSet hs_bad = plan_hinges(bad, p);
    try {
        assemble_program(bad, hs_bad, p);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind == "SpacingInfeasible");
    }
}

TEST_CASE("perimeter routing marks every usable side of the face") {
    Params p;
    // 8.4mm faces at the 2mm floor need a perimeter lap (type 2): all three
    // sides carry channels, lock clusters equal the corner count
    FlatLayout fl = mirror_pair(8.4, 2.0);
    HingeSet hs = plan_hinges(fl, p);
    REQUIRE(hs.plans[0].type == 2);
    StitchProgram prog = assemble_program(fl, hs, p);
    CHECK(count_tag(prog, "lock") == 6);     // 3 corners per face
    CHECK(count_tag(prog, "channel") == 12); // 3 sides per face, 2 rows each

    // both terminals of a type-2 loop return to the same lock corner
    const StitchRun* s1 = nullptr;
    for (const auto& r : prog.runs)
        if (r.tag == "shrink") { s1 = &r; break; }
    REQUIRE(s1);
    CHECK(dist(s1->points.front().pos, s1->points.back().pos) < 1e-9);
}

TEST_CASE("channel capacity of six threads is enforced") {
    Params p;
    // two separation-8 hinges select double laps (type 3): 4+4 passes on the
    // shared face overflow the six-thread channel
    Poly E = equilateral(8.4, {0, 0});
    FlatLayout fl;
    fl.faces.push_back(mkface(0, E));
    Poly n0 = {{8.4, -8}, {0, -8}, {4.2, -8 - 8.4 * std::sqrt(3.0) / 2}};
    fl.faces.push_back(mkface(1, n0));
    EdgeGap g0;
    g0.id = 0;
    g0.face_a = 0;
    g0.face_b = 1;
    g0.a_u = {0, 0};
    g0.a_v = {8.4, 0};
    g0.b_u = {0, -8};
    g0.b_v = {8.4, -8};
    g0.gap_lo = 2;
    g0.gap_hi = 1e9;
    fl.gaps.push_back(g0);

    // mirror across the outward-offset line of side 1
    Vec2 A = E[1], B = E[2];
    Vec2 d = (B - A).normalized();
    Vec2 out = -d.perp();
    Line axis{A + out * 4.0, d};
    Poly n1 = {axis.reflect(B), axis.reflect(A), axis.reflect(E[0])};
    REQUIRE(polygon_area(n1) > 0);
    fl.faces.push_back(mkface(2, n1));
    EdgeGap g1;
    g1.id = 1;
    g1.face_a = 0;
    g1.face_b = 2;
    g1.a_u = A;
    g1.a_v = B;
    g1.b_u = axis.reflect(A);
    g1.b_v = axis.reflect(B);
    g1.gap_lo = 2;
    g1.gap_hi = 1e9;
    fl.gaps.push_back(g1);

    HingeSet hs = plan_hinges(fl, p);
    REQUIRE(hs.plans.size() == 2);
    CHECK(hs.plans[0].type == 3);
    CHECK(hs.plans[1].type == 3);
    try {
        assemble_program(fl, hs, p);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind == "ChannelConflict");
        CHECK(std::string(e.what()).find("face 0") != std::string::npos);
    }
}

TEST_CASE("shared penetrations count once for spacing") {
    StitchProgram prog;
    StitchRun a, b;
    a.id = 0;
    b.id = 1;
    a.points.push_back({{0, 0}, PointRole::channel});
    b.points.push_back({{0, 0}, PointRole::channel});  // identical: one hole
    prog.runs = {a, b};
    check_spacing(prog, 0.3);  // no throw

    prog.runs[1].points[0].pos = {0.2, 0};
    try {
        check_spacing(prog, 0.3);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind == "SpacingInfeasible");
    }
}

TEST_CASE("program assembly is deterministic") {
    Params p;
    FlatLayout fl = mirror_pair(16.0, 2.0);
    HingeSet hs = plan_hinges(fl, p);
    std::string d1 = program_digest(assemble_program(fl, hs, p));
    std::string d2 = program_digest(assemble_program(fl, hs, p));
    CHECK(d1 == d2);
    CHECK(!d1.empty());
}
