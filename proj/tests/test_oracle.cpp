#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "stitchfold/oracle.hpp"

using namespace stitchfold;

namespace {

// Open pyramid: apex over a square rim, four faces, disk topology.
TriangleMesh pyramid() {
    TriangleMesh m;
    m.verts = {{0, 0, 8}, {10, 10, 0}, {-10, 10, 0}, {-10, -10, 0}, {10, -10, 0}};
    m.faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
    return m;
}

FlatLayout flatten_pyramid() {
    Params p;
    WorkingLayout L = initialize_layout(pyramid(), p);
    optimize(L, p);
    return snapshot(L);
}

// Two coplanar triangles joined along the x axis, plus extra geometry per test.
TriangleMesh flat_pair() {
    TriangleMesh m;
    m.verts = {{0, 0, 0}, {10, 0, 0}, {5, 8, 0}, {5, -8, 0}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    return m;
}

// Hinge record over the flat pair's shared edge, faces 3mm apart on the sheet.
EdgeGap pair_gap() {
    EdgeGap g;
    g.id = 0;
    g.face_a = 0;
    g.face_b = 1;
    g.mesh_u = 0;
    g.mesh_v = 1;
    g.a_u = {0, 0};
    g.a_v = {10, 0};
    g.b_u = {0, -3};
    g.b_v = {10, -3};
    return g;
}

// Sheet for the flat pair: face 0 above the gap, face 1 flipped below it.
FlatLayout pair_layout() {
    FlatLayout fl;
    fl.faces.resize(2);
    fl.faces[0].id = 0;
    fl.faces[0].poly = {{0, 0}, {10, 0}, {5, 8}};
    fl.faces[0].sources = {{0, FacePlacement{}}};
    fl.faces[1].id = 1;
    fl.faces[1].poly = {{10, -3}, {0, -3}, {5, -11}};
    fl.faces[1].sources = {{1, FacePlacement{M_PI, {10, -3}}}};
    fl.gaps = {pair_gap()};
    return fl;
}

double residual_of(const FoldReport& rep, int gap_id) {
    for (auto& [id, r] : rep.edge_residual)
        if (id == gap_id) return r;
    return -1;
}

bool touches(const EdgeGap& g, int face) { return g.face_a == face || g.face_b == face; }

}  // namespace

TEST_CASE("a clean layout folds back onto the pyramid") {
    TriangleMesh m = pyramid();
    FlatLayout fl = flatten_pyramid();
    FoldReport rep = reconstruct(m, fl);

    CHECK(rep.max_vertex_deviation >= 0);
    CHECK(rep.max_vertex_deviation < 1e-9);
    CHECK(rep.edge_residual.size() == 4);  // every interior edge is audited
    for (auto& [id, r] : rep.edge_residual) {
        CHECK(r >= 0);
        CHECK(r < 1e-6);
    }
    CHECK(rep.max_edge_residual < 1e-6);
    CHECK(rep.boundary_edges == 4);
    CHECK(rep.merged_deviation.empty());
    for (auto& [id, ok] : rep.tuck_ok) CHECK(ok);  // hollow pyramid: room behind every crease
}

TEST_CASE("a shifted face is caught on every edge it touches") {
    TriangleMesh m = pyramid();
    FlatLayout fl = flatten_pyramid();
    fl.faces[1].sources[0].place.trans += Vec2(0.5, 0);

    FoldReport rep = reconstruct(m, fl);
    CHECK(rep.max_vertex_deviation == doctest::Approx(0.5));
    int hits = 0;
    for (auto& g : fl.gaps) {
        double r = residual_of(rep, g.id);
        if (touches(g, 1)) {
            CHECK(r == doctest::Approx(0.5));
            ++hits;
        } else {
            CHECK(r < 1e-9);
        }
    }
    CHECK(hits >= 1);
}

TEST_CASE("any drift past a tenth of a millimeter is visible") {
    TriangleMesh m = pyramid();
    FlatLayout base = flatten_pyramid();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> mag(0.1, 2.0);
    std::uniform_real_distribution<double> ang(0, 2 * M_PI);
    std::uniform_int_distribution<int> pick(0, (int)base.faces.size() - 1);

    for (int it = 0; it < 200; ++it) {
        FlatLayout fl = base;
        int f = pick(rng);
        double d = mag(rng), a = ang(rng);
        fl.faces[f].sources[0].place.trans += Vec2(d * std::cos(a), d * std::sin(a));

        FoldReport rep = reconstruct(m, fl);
        double worst = 0;
        for (auto& g : fl.gaps)
            if (touches(g, f)) worst = std::max(worst, residual_of(rep, g.id));
        CHECK(worst >= 0.09);
        CHECK(worst == doctest::Approx(d));  // a rigid shift survives the mapping intact
    }
}

TEST_CASE("bookkeeping that lost the mesh is an error") {
    TriangleMesh m = pyramid();

    FlatLayout fl = flatten_pyramid();
    fl.faces[0].sources[0].mesh_face = 99;
    CHECK_THROWS_WITH_AS(reconstruct(m, fl), doctest::Contains("mesh face 99"), Error);

    FlatLayout fl2 = flatten_pyramid();
    fl2.faces[0].sources.clear();  // gap 0 can no longer find its edge
    try {
        reconstruct(m, fl2);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind == "CorrespondenceMissing");
    }
}

TEST_CASE("an isolated pair tucks, a wall underneath blocks it") {
    TriangleMesh m = flat_pair();
    EdgeGap g = pair_gap();
    CHECK(tuck_feasibility(m, g, 2.0));

    // Wall hanging from the hinge vertex down across the band's fold plane.
    TriangleMesh blocked = flat_pair();
    blocked.verts.push_back({3, -1, -1});
    blocked.verts.push_back({3, 1, -1});
    blocked.faces.push_back({1, 4, 5});
    CHECK_FALSE(tuck_feasibility(blocked, g, 2.0));

    // Same wall on the outside of the fold: never in the way.
    TriangleMesh clear = flat_pair();
    clear.verts.push_back({3, -1, 1});
    clear.verts.push_back({3, 1, 1});
    clear.faces.push_back({1, 4, 5});
    CHECK(tuck_feasibility(clear, g, 2.0));

    // Faces folded flat onto each other leave no room for the band at all.
    TriangleMesh folded = flat_pair();
    folded.verts[3] = {5, 8, 1e-9};
    CHECK_FALSE(tuck_feasibility(folded, g, 1.0));
}

TEST_CASE("a ridge tucks clear when its neighborhood bends away") {
    // Symmetric tent: both faces rise at 45 degrees, band folds into the
    // empty space underneath. Holds at full depth and at harmonica depth.
    TriangleMesh m;
    m.verts = {{0, 0, 0}, {10, 0, 0}, {5, 7, 7}, {5, -7, 7}};
    m.faces = {{0, 1, 2}, {1, 0, 3}};
    EdgeGap g = pair_gap();
    CHECK(tuck_feasibility(m, g, 1.5));
    CHECK(tuck_feasibility(m, g, 0.75));
}

TEST_CASE("harmonica routing halves the depth a hinge needs") {
    // Plate 1.2mm behind the crease: a 1.5mm flap hits it, a 0.75mm one fits.
    TriangleMesh m = flat_pair();
    m.verts.push_back({3, -1, -1.2});
    m.verts.push_back({3, 1, -1.2});
    m.verts.push_back({7, 0, -1.2});
    m.faces.push_back({4, 5, 6});

    EdgeGap g = pair_gap();
    CHECK_FALSE(tuck_feasibility(m, g, 1.5));
    CHECK(tuck_feasibility(m, g, 0.75));

    FlatLayout fl = pair_layout();
    FoldReport plain = reconstruct(m, fl);
    REQUIRE(plain.tuck_ok.size() == 1);
    CHECK_FALSE(plain.tuck_ok[0].second);  // separation 3 -> 1.5mm flap

    HingeSet hs;
    HingePlan pl;
    pl.gap_id = 0;
    pl.type = 4;
    hs.plans.push_back(pl);
    FoldReport folded = reconstruct(m, fl, &hs);
    REQUIRE(folded.tuck_ok.size() == 1);
    CHECK(folded.tuck_ok[0].second);

    CHECK(plain.max_edge_residual < 1e-9);  // hand-built sheet still closes exactly
    CHECK(plain.max_vertex_deviation < 1e-9);
}

TEST_CASE("fused faces report how far their sources bow out of plane") {
    auto quad_mesh = [](double lift) {
        TriangleMesh m;
        m.verts = {{0, 0, 0}, {10, 0, 0}, {10, 10, lift}, {0, 10, 0}};
        m.faces = {{0, 1, 2}, {0, 2, 3}};
        return m;
    };
    FlatLayout fl;
    fl.faces.resize(1);
    fl.faces[0].id = 0;
    fl.faces[0].sources = {{0, FacePlacement{}}, {1, FacePlacement{}}};
    fl.faces[0].poly = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};

    FoldReport flat = reconstruct(quad_mesh(0.0), fl);
    REQUIRE(flat.merged_deviation.size() == 1);
    CHECK(flat.merged_deviation[0].second >= 0);
    CHECK(flat.merged_deviation[0].second < 1e-9);

    FoldReport bowed = reconstruct(quad_mesh(0.5), fl);
    REQUIRE(bowed.merged_deviation.size() == 1);
    CHECK(bowed.merged_deviation[0].second > 0.01);
    CHECK(bowed.merged_deviation[0].second < 0.5);
}
