#include <cmath>

#include "doctest.h"
#include "stitchfold/errors.hpp"
#include "stitchfold/resolve.hpp"

using namespace stitchfold;

namespace {

LayoutFace mkface(int id, Poly poly) {
    LayoutFace f;
    f.id = id;
    f.poly = std::move(poly);
    f.sources.push_back({id, {}});
    return f;
}

FlatLayout mklayout(std::vector<Poly> polys) {
    FlatLayout fl;
    for (auto& p : polys) fl.faces.push_back(mkface((int)fl.faces.size(), std::move(p)));
    return fl;
}

// wide triangle crossed by a blade whose long edge passes through (20,1)
// descending at `deg` below horizontal; apex far below
Poly wide_tri() { return {{0, 0}, {40, 0}, {20, 10}}; }

Poly blade(double deg) {
    double a = deg * M_PI / 180.0, c = std::cos(a), s = std::sin(a);
    Vec2 b0{20 - 15 * c, 1 + 15 * s}, b1{20 + 15 * c, 1 - 15 * s};
    return {b0, {20, -30}, b1};
}

Poly translated(const Poly& p, Vec2 d) {
    Poly out = p;
    for (auto& v : out) v += d;
    return out;
}

double boundary_dist(const Poly& poly, const Vec2& q) {
    double best = 1e300;
    for (size_t i = 0; i < poly.size(); ++i)
        best = std::min(best, point_segment_dist(q, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

int alive_count(const FlatLayout& fl) {
    int n = 0;
    for (const auto& f : fl.faces) n += f.alive;
    return n;
}

}  // namespace

TEST_CASE("crossing angle decides shallow vs steep") {
    Params p;
    Poly A = wide_tri();

    Classification c1 = classify_overlap(A, blade(9.9), p);
    CHECK(c1.cls == OverlapClass::shallow_partial);
    CHECK(c1.angle_deg == doctest::Approx(9.9).epsilon(0.01));

    Classification c2 = classify_overlap(A, blade(10.1), p);
    CHECK(c2.cls == OverlapClass::steep_partial);
    CHECK(c2.angle_deg == doctest::Approx(10.1).epsilon(0.01));
}

TEST_CASE("coincident boundaries and containment classify as full overlap") {
    Params p;
    Poly A = wide_tri();

    // near-identical copy: every edge pair within coincidence tolerance
    Classification c1 = classify_overlap(A, translated(A, {0.01, 0.01}), p);
    CHECK(c1.cls == OverlapClass::full_overlap);
    CHECK(!c1.containment);

    // small triangle strictly inside: no boundary interaction at all
    Classification c2 = classify_overlap(A, Poly{{18, 3}, {22, 3}, {20, 6}}, p);
    CHECK(c2.cls == OverlapClass::full_overlap);
    CHECK(c2.containment);
}

TEST_CASE("stacked copies absorb into one region") {
    Params p;
    FlatLayout fl = mklayout({wide_tri(), translated(wide_tri(), {0.01, 0.01})});
    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 1);
    CHECK(log[0].action == "absorbed");
    CHECK(alive_count(fl) == 1);
    const LayoutFace* keeper = nullptr;
    for (const auto& f : fl.faces)
        if (f.alive) keeper = &f;
    REQUIRE(keeper);
    CHECK(keeper->sources.size() == 2);
    CHECK(log[0].trimmed_area >= 0);
    CHECK(log[0].trimmed_area < 1.0);  // only the offset sliver is uncovered
    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("contained face absorbs into its container") {
    Params p;
    FlatLayout fl = mklayout({wide_tri(), {{18, 3}, {22, 3}, {20, 6}}});
    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 1);
    CHECK(log[0].action == "absorbed");
    CHECK(alive_count(fl) == 1);
    CHECK(fl.faces[0].alive);  // the larger face keeps the fabric
    CHECK(fl.faces[0].sources.size() == 2);
    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("shallow crossing merges into one region") {
    Params p;
    double areaA = std::abs(polygon_area(wide_tri()));
    double areaB = std::abs(polygon_area(blade(5.0)));
    FlatLayout fl = mklayout({wide_tri(), blade(5.0)});
    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 1);
    CHECK(log[0].action == "merged");
    CHECK(log[0].cls == OverlapClass::shallow_partial);
    CHECK(log[0].trimmed_area > 0);
    CHECK(alive_count(fl) == 1);
    const LayoutFace* keeper = nullptr;
    for (const auto& f : fl.faces)
        if (f.alive) keeper = &f;
    REQUIRE(keeper);
    CHECK(keeper->clipped);
    CHECK(keeper->sources.size() == 2);
    double merged = std::abs(polygon_area(keeper->poly));
    CHECK(merged > std::max(areaA, areaB));
    CHECK(merged < areaA + areaB);
    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("steep crossing splits both faces and inserts a hinge") {
    Params p;
    // horizontal slab crossed by an equal slab at 30 degrees, pushed down so
    // the two naturally claim opposite sides of the crossing strip
    Poly A = {{0, 0}, {80, 0}, {80, 10}, {0, 10}};
    Vec2 u{std::cos(M_PI / 6), std::sin(M_PI / 6)}, v = u.perp(), ctr{40, -2};
    Poly B = {ctr - u * 40 - v * 5, ctr + u * 40 - v * 5, ctr + u * 40 + v * 5,
              ctr - u * 40 + v * 5};

    FlatLayout fl = mklayout({A, B});
    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 1);
    CHECK(log[0].action == "split");
    CHECK(log[0].cls == OverlapClass::steep_partial);
    CHECK(alive_count(fl) == 2);
    CHECK(fl.faces[0].clipped);
    CHECK(fl.faces[1].clipped);

    REQUIRE(log[0].inserted_gap == 0);
    REQUIRE(fl.gaps.size() == 1);
    const EdgeGap& g = fl.gaps[0];
    CHECK(g.inserted);
    CHECK(g.alive);
    CHECK(g.face_a == 0);  // horizontal slab kept the upper side
    CHECK(g.face_b == 1);
    CHECK(g.separation() == doctest::Approx(p.gap_min_mm).epsilon(1e-9));
    CHECK(g.length() > 30);  // hinge spans the whole former overlap diagonal
    CHECK(g.length() < 45);
    CHECK(g.gap_lo == p.gap_min_mm);

    // anchors sit on the clipped face boundaries
    CHECK(boundary_dist(fl.faces[0].poly, g.a_u) < 1e-6);
    CHECK(boundary_dist(fl.faces[0].poly, g.a_v) < 1e-6);
    CHECK(boundary_dist(fl.faces[1].poly, g.b_u) < 1e-6);
    CHECK(boundary_dist(fl.faces[1].poly, g.b_v) < 1e-6);

    // contested fabric was shed, one big off-cut per face
    REQUIRE(fl.shavings.size() >= 2);
    int big_shavings = 0;
    for (const auto& s : fl.shavings)
        if (std::abs(polygon_area(s)) > 100) ++big_shavings;
    CHECK(big_shavings == 2);

    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("cascading overlaps resolve across rounds") {
    Params p;
    // needle stabs up through the wide face and on into the cap above it;
    // the needle is involved in both overlaps so the second waits a round
    Poly A = {{0, 0}, {40, 0}, {20, 12}};
    Poly B = {{24, -10}, {28, -10}, {26, 30}};
    Poly C = {{10, 15}, {30, 15}, {20, 25}};
    FlatLayout fl = mklayout({A, B, C});
    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 2);
    CHECK(log[0].round == 1);
    CHECK(log[0].face_a == 0);
    CHECK(log[0].face_b == 1);
    CHECK(log[0].action == "split");
    CHECK(log[1].round == 2);
    CHECK(log[1].face_a == 1);
    CHECK(log[1].face_b == 2);
    CHECK(alive_count(fl) == 3);
    CHECK(std::abs(polygon_area(fl.faces[1].poly)) < 40);  // needle clipped twice
    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("round limit exhaustion reports unresolvable") {
    Params p;
    p.max_rounds = 0;
    Poly A = {{0, 0}, {80, 0}, {80, 10}, {0, 10}};
    Vec2 u{std::cos(M_PI / 6), std::sin(M_PI / 6)}, v = u.perp(), ctr{40, -2};
    Poly B = {ctr - u * 40 - v * 5, ctr + u * 40 - v * 5, ctr + u * 40 + v * 5,
              ctr - u * 40 + v * 5};
    FlatLayout fl = mklayout({A, B});
    try {
        resolve_all(fl, p);
        FAIL("expected unresolvable error");
    } catch (const Error& e) {
        CHECK(e.cls == ErrClass::unresolvable);
        CHECK(e.kind == "UnresolvableIntersections");
    }
}

TEST_CASE("band overlaps with no face pair are unresolvable") {
    Params p;
    FlatLayout fl = mklayout({{{0, 0}, {10, 0}, {5, 8}},
                              {{30, 0}, {40, 0}, {35, 8}},
                              {{18, 2}, {22, 2}, {20, 6}}});
    EdgeGap g;
    g.id = 0;
    g.face_a = 0;
    g.face_b = 1;
    g.a_u = {10, 0};
    g.a_v = {10, 8};
    g.b_u = {30, 0};
    g.b_v = {30, 8};
    g.gap_lo = 2;
    g.gap_hi = 1e9;
    fl.gaps.push_back(g);  // its band swallows the third face

    try {
        resolve_all(fl, p);
        FAIL("expected unresolvable error");
    } catch (const Error& e) {
        CHECK(e.cls == ErrClass::unresolvable);
        CHECK(e.kind == "UnresolvableIntersections");
    }
}

TEST_CASE("gap anchors trim back with the clipped faces, mirror kept") {
    Params p;
    // two faces across a 2mm gap, each stabbed near its left end by a needle
    Poly f0 = {{0, 0}, {20, 0}, {10, 12}};
    Poly f1 = {{20, -2}, {0, -2}, {10, -14}};
    Poly stab_top = {{2, 16}, {4, -1.5}, {6, 16}};
    Poly stab_bot = {{2, -18}, {6, -18}, {4, -0.5}};
    FlatLayout fl = mklayout({f0, f1, stab_top, stab_bot});

    EdgeGap g;
    g.id = 0;
    g.face_a = 0;
    g.face_b = 1;
    g.mesh_u = 0;
    g.mesh_v = 1;
    g.a_u = {0, 0};
    g.a_v = {20, 0};
    g.b_u = {0, -2};
    g.b_v = {20, -2};
    g.tree = true;
    g.gap_lo = 2;
    g.gap_hi = 1e9;
    fl.gaps.push_back(g);

    auto log = resolve_all(fl, p);

    REQUIRE(log.size() == 2);
    CHECK(log[0].round == 1);
    CHECK(log[1].round == 1);  // disjoint face pairs resolve in the same sweep
    CHECK(alive_count(fl) == 4);

    const EdgeGap& t = fl.gaps[0];
    REQUIRE(t.alive);
    CHECK(t.a_u.x > 3);  // trimmed clear of the stab on both sides
    CHECK(t.a_u.x < 6);
    CHECK(t.b_u.x > 3);
    CHECK(t.a_u.y == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.b_u.y == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(t.a_v.x == doctest::Approx(20.0));
    CHECK(t.length() > p.min_edge);
    CHECK(t.length() < 20);
    CHECK(t.separation() == doctest::Approx(2.0).epsilon(1e-6));

    // the two edge images remain exact reflections of each other
    Line m = t.midline();
    CHECK((m.reflect(t.a_u) - t.b_u).norm() < 1e-6);
    CHECK((m.reflect(t.a_v) - t.b_v).norm() < 1e-6);

    CHECK(overlap_report(fl, true).empty());
}

TEST_CASE("resolution log serializes one event per line") {
    std::vector<ResolutionEvent> log(2);
    log[0].round = 1;
    log[0].cls = OverlapClass::steep_partial;
    log[0].face_a = 0;
    log[0].face_b = 1;
    log[0].area = 12.5;
    log[0].action = "split";
    log[0].inserted_gap = 3;
    log[1].round = 2;
    log[1].cls = OverlapClass::full_overlap;
    log[1].face_a = 1;
    log[1].face_b = 2;
    log[1].action = "absorbed";

    std::string s = to_jsonl(log);
    CHECK(s.find("\"round\":1") != std::string::npos);
    CHECK(s.find("\"class\":\"steep_partial\"") != std::string::npos);
    CHECK(s.find("\"faces\":[0,1]") != std::string::npos);
    CHECK(s.find("\"action\":\"split\"") != std::string::npos);
    CHECK(s.find("\"inserted_gap\":3") != std::string::npos);
    CHECK(s.find("\"class\":\"full_overlap\"") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}
