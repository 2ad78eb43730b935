#include <cmath>

#include "doctest.h"
#include "stitchfold/hinge.hpp"

using namespace stitchfold;

namespace {

TriangleMesh cone_fan() {
    TriangleMesh m;
    const double r = 20, h = 10;
    m.verts.push_back({0, 0, h});
    for (int i = 0; i < 4; ++i) {
        double a = i * M_PI / 2;
        m.verts.push_back({r * std::cos(a), r * std::sin(a), 0});
    }
    for (int i = 0; i < 4; ++i) m.faces.push_back({0, 1 + i, 1 + (i + 1) % 4});
    return m;
}

// Parallel gap fixture: 20mm hinge edge, 4mm gap, isoceles faces both sides.
struct Fixture {
    EdgeGap gap;
    Poly face_a, face_b;
    Fixture() {
        gap.id = 0;
        gap.face_a = 0;
        gap.face_b = 1;
        gap.a_u = {0, 0};
        gap.a_v = {20, 0};
        gap.b_u = {0, -4};
        gap.b_v = {20, -4};
        face_a = {{0, 0}, {20, 0}, {10, 15}};       // CCW, interior above
        face_b = {{20, -4}, {0, -4}, {10, -19}};    // CCW, interior below
    }
};

double contracting_length(const std::vector<HingeSegment>& segs) {
    double sum = 0;
    for (const auto& s : segs)
        if (s.kind != HingeSegment::hop) sum += s.length();
    return sum;
}

int crossing_count(const std::vector<HingeSegment>& segs) {
    int n = 0;
    for (const auto& s : segs)
        if (s.kind == HingeSegment::crossing) ++n;
    return n;
}

}  // namespace

TEST_CASE("usable spans clamp at the corner clearance") {
    CHECK(usable_span(10, 3) == doctest::Approx(4));
    CHECK(usable_span(6, 3) == doctest::Approx(0));
    CHECK(usable_span(5.9, 3) == doctest::Approx(0));
    Poly tri{{0, 0}, {10, 0}, {0, 10}};
    // sides 10, 10*sqrt(2), 10 with cc=3 -> 4 + (14.142-6) + 4
    CHECK(perimeter_spans(tri, 3) == doctest::Approx(4 + 10 * std::sqrt(2.0) - 6 + 4));
}

TEST_CASE("type selection walks the capacity ladder") {
    const double L = 10, P = 30, shrink = 0.3, safety = 1.2;
    // thresholds: t1 up to 2L/3, t2 to (Pa+Pb)/2, t3 to Pa+Pb, t4 to 2(Pa+Pb+L)
    CHECK(select_type(L, L, P, P, 6.6, shrink, safety) == 1);
    CHECK(select_type(L, L, P, P, 6.7, shrink, safety) == 2);
    CHECK(select_type(L, L, P, P, 29.9, shrink, safety) == 2);
    CHECK(select_type(L, L, P, P, 30.1, shrink, safety) == 3);
    CHECK(select_type(L, L, P, P, 59.9, shrink, safety) == 3);
    CHECK(select_type(L, L, P, P, 60.1, shrink, safety) == 4);
    CHECK(select_type(L, L, P, P, 139.9, shrink, safety) == 4);
    CHECK(select_type(L, L, P, P, 140.1, shrink, safety) == 0);

    int prev = 1;
    for (double s = 0.5; s <= 150; s += 0.5) {
        int t = select_type(L, L, P, P, s, shrink, safety);
        if (t == 0) t = 5;
        CHECK(t >= prev);  // selection is monotone in separation
        prev = t;
    }

    CHECK(max_separation_type4(L, L, P, P, shrink, safety) == doctest::Approx(140.0));
    // capacity slope >= requirement slope: no finite limit
    CHECK(max_separation_type4(L, L, P, P, 0.5, 1.2) == doctest::Approx(1e9));
}

TEST_CASE("skeleton contracting length equals the capacity formula") {
    Fixture fx;
    const double cc = 3.0;
    double La = usable_span(20, cc), Lb = La;
    double Pa = perimeter_spans(fx.face_a, cc), Pb = perimeter_spans(fx.face_b, cc);
    double s = 4.0;

    for (int type = 1; type <= 4; ++type) {
        auto segs = build_skeleton(fx.gap, fx.face_a, fx.face_b, type, cc);
        double want = free_length_for(type, La, Lb, Pa, Pb, s);
        CHECK(contracting_length(segs) == doctest::Approx(want).epsilon(1e-12));
        CHECK(crossing_count(segs) == (type == 1 ? 1 : type == 4 ? 3 : 2));
        // crossings on a parallel gap are perpendicular, exactly s long
        for (const auto& seg : segs)
            if (seg.kind == HingeSegment::crossing) {
                CHECK(seg.length() == doctest::Approx(s));
                CHECK(std::abs(dot(seg.b - seg.a, Vec2{1, 0})) < 1e-12);
            }
        // the path is connected end to end
        for (size_t i = 1; i < segs.size(); ++i) CHECK(dist(segs[i - 1].b, segs[i].a) < 1e-9);
    }
}

TEST_CASE("hinge plans for an optimized layout") {
    Params p;
    WorkingLayout L = initialize_layout(cone_fan(), p);
    set_gap_caps(L, gap_caps(L, p));
    optimize(L, p);
    FlatLayout fl = snapshot(L);
    HingeSet hs = plan_hinges(fl, p);
    REQUIRE(hs.plans.size() == 4);
    for (const auto& plan : hs.plans) {
        CHECK(plan.capacity >= plan.required_contraction);
        CHECK(plan.separation >= p.gap_min_mm - 1e-3);
    }
    // tree gaps stay near gap_min and close with type 1; the closure gap
    // carries the apex wedge, opens to ~11mm and needs a perimeter lap
    for (size_t i = 0; i < hs.plans.size(); ++i) {
        if (fl.gaps[hs.plans[i].gap_id].tree)
            CHECK(hs.plans[i].type == 1);
        else
            CHECK(hs.plans[i].type == 2);
    }
    CHECK(hs.histogram_str() == "3,1,0,0");

    // a barely-shrinking thread can't close anything: planning must refuse
    Params weak = p;
    weak.shrink_ratio = 0.01;
    try {
        plan_hinges(fl, weak);
        FAIL("expected GapExceedsType4");
    } catch (const Error& e) {
        CHECK(e.kind == "GapExceedsType4");
        CHECK(std::string(e.what()).find("separation") != std::string::npos);
    }
}

TEST_CASE("per-edge caps honor the config ceiling and the minimum gap") {
    Params p;
    WorkingLayout L = initialize_layout(cone_fan(), p);
    auto caps = gap_caps(L, p);
    REQUIRE(caps.size() == L.edges.size());
    for (double c : caps) CHECK(c > 100.0);  // generous for 20mm-scale faces

    Params capped = p;
    capped.gap_max_mm = 5.0;
    for (double c : gap_caps(L, capped)) CHECK(c == doctest::Approx(5.0));

    Params weak = p;
    weak.shrink_ratio = 0.005;
    CHECK_THROWS_AS(gap_caps(L, weak), Error);
}
