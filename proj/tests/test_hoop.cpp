#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "stitchfold/errors.hpp"
#include "stitchfold/fabplan.hpp"
#include "stitchfold/hinge.hpp"
#include "stitchfold/hoop.hpp"
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

// n squares of the given widths in a row, hinged along facing vertical
// sides, `sep` apart. Heights are all 30.
FlatLayout strip(const std::vector<double>& widths, double sep) {
    FlatLayout fl;
    double x = 0;
    std::vector<double> lefts;
    for (size_t i = 0; i < widths.size(); ++i) {
        lefts.push_back(x);
        fl.faces.push_back(
            mkface((int)i, {{x, 0}, {x + widths[i], 0}, {x + widths[i], 30}, {x, 30}}));
        x += widths[i] + sep;
    }
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
        EdgeGap g;
        g.id = (int)i;
        g.face_a = (int)i;
        g.face_b = (int)i + 1;
        g.mesh_u = 2 * (int)i;
        g.mesh_v = 2 * (int)i + 1;
        double r = lefts[i] + widths[i];
        g.a_u = {r, 0};
        g.a_v = {r, 30};
        g.b_u = {r + sep, 0};
        g.b_v = {r + sep, 30};
        g.tree = true;
        g.gap_lo = sep;
        g.gap_hi = 1e9;
        fl.gaps.push_back(g);
    }
    return fl;
}

struct Built {
    FlatLayout fl;
    HingeSet hs;
    StitchProgram prog;
    FabPlan fab;
    HoopPlan plan;
};

Built build(const std::vector<double>& widths, double sep, const Params& p) {
    Built b;
    b.fl = strip(widths, sep);
    b.hs = plan_hinges(b.fl, p);
    b.prog = assemble_program(b.fl, b.hs, p);
    b.fab = plan_fabrication(b.fl, b.hs, b.prog, p);
    b.plan = partition(b.fl, b.prog, b.fab, p);
    return b;
}

std::vector<int> assigned_ids(const HoopPlan& plan) {
    std::vector<int> ids;
    for (const auto& h : plan.hoops) ids.insert(ids.end(), h.runs.begin(), h.runs.end());
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<int> program_ids(const StitchProgram& prog) {
    std::vector<int> ids;
    for (const auto& r : prog.runs) ids.push_back(r.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

int tag_rank(const std::string& tag) {
    if (tag == "fold") return 1;
    if (tag == "shrink") return 2;
    if (tag == "hold") return 3;
    return 0;
}

bool stitch_order_ok(const HoopPlan& plan, const StitchProgram& prog) {
    std::map<int, int> rank;
    for (const auto& r : prog.runs) rank[r.id] = tag_rank(r.tag);
    for (const auto& h : plan.hoops)
        for (size_t i = 1; i < h.runs.size(); ++i)
            if (rank.at(h.runs[i - 1]) > rank.at(h.runs[i])) return false;
    return true;
}

bool runs_inside_windows(const HoopPlan& plan, const StitchProgram& prog, const Params& p) {
    std::map<int, const StitchRun*> by_id;
    for (const auto& r : prog.runs) by_id[r.id] = &r;
    for (const auto& h : plan.hoops)
        for (int id : h.runs)
            for (const auto& np : by_id.at(id)->points) {
                if (np.pos.x < h.lo.x + p.hoop_margin_mm - 1e-9) return false;
                if (np.pos.x > h.hi.x - p.hoop_margin_mm + 1e-9) return false;
                if (np.pos.y < h.lo.y + p.hoop_margin_mm - 1e-9) return false;
                if (np.pos.y > h.hi.y - p.hoop_margin_mm + 1e-9) return false;
            }
    return true;
}

bool later_stages_share_a_square(const HoopPlan& plan) {
    std::set<int> earlier;
    for (size_t h = 0; h < plan.hoops.size(); ++h) {
        if (h) {
            bool shared = false;
            for (int id : plan.hoops[h].regs)
                if (earlier.count(id)) shared = true;
            if (!shared) return false;
        }
        earlier.insert(plan.hoops[h].regs.begin(), plan.hoops[h].regs.end());
    }
    return true;
}

}  // namespace

TEST_CASE("sheet smaller than the window stays in one hoop") {
    Params p;
    Built b = build({30, 30}, 3, p);

    REQUIRE(b.plan.hoops.size() == 1);
    CHECK(assigned_ids(b.plan) == program_ids(b.prog));
    CHECK(b.plan.deps.empty());
    CHECK(b.plan.hoops[0].faces == std::vector<int>{0, 1});
    CHECK(b.plan.hoops[0].hi.x - b.plan.hoops[0].lo.x == doctest::Approx(180.0));
    CHECK(b.plan.hoops[0].hi.y - b.plan.hoops[0].lo.y == doctest::Approx(130.0));
    CHECK(stitch_order_ok(b.plan, b.prog));
    CHECK(runs_inside_windows(b.plan, b.prog, p));
    // nothing to align against, nothing to cut for it
    CHECK(b.plan.squares.empty());
    CHECK(validate_sequence(b.plan, b.prog, b.fl).empty());
}

TEST_CASE("two window-filling faces split and the hinge thread waits for the later face") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    Built b = build({30, 30}, 3, p);

    REQUIRE(b.plan.hoops.size() == 2);
    CHECK(b.plan.hoops[0].faces == std::vector<int>{0});
    CHECK(b.plan.hoops[1].faces == std::vector<int>{1});
    CHECK(assigned_ids(b.plan) == program_ids(b.prog));
    CHECK(b.plan.deps == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(stitch_order_ok(b.plan, b.prog));
    CHECK(runs_inside_windows(b.plan, b.prog, p));
    CHECK(validate_sequence(b.plan, b.prog, b.fl).empty());

    // every thread owned by the hinge stitches in the later stage
    std::set<int> late(b.plan.hoops[1].runs.begin(), b.plan.hoops[1].runs.end());
    for (const auto& r : b.prog.runs) {
        if (r.gap == 0) CHECK(late.count(r.id) == 1);
        if (r.face == 0) CHECK(late.count(r.id) == 0);
    }

    // no holes on this sheet, so the shared square is cut into waste
    CHECK(b.plan.fab_squares == 0);
    REQUIRE(b.plan.squares.size() == 1);
    CHECK(b.plan.hoops[0].regs == std::vector<int>{0});
    CHECK(b.plan.hoops[1].regs == std::vector<int>{0});
    const CutPath& sq = b.plan.squares[0];
    REQUIRE(sq.pts.size() == 4);
    CHECK(sq.closed);
    CHECK(sq.kind == CutPath::Kind::registration_square);
    for (const auto& f : b.fl.faces)
        for (size_t i = 0; i < f.poly.size(); ++i)
            for (size_t e = 0; e < 4; ++e) {
                double d = segment_segment_dist(sq.pts[e], sq.pts[(e + 1) % 4], f.poly[i],
                                                f.poly[(i + 1) % f.poly.size()]);
                CHECK(d >= 1.5 - 1e-9);
            }
}

TEST_CASE("face wider than the stitchable window is rejected") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    FlatLayout fl = strip({50, 30}, 3);
    StitchProgram prog;
    FabPlan fab;
    try {
        partition(fl, prog, fab, p);
        FAIL("expected RunTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind == "RunTooLarge");
        CHECK(std::string(e.what()).find("face 0") != std::string::npos);
    }
}

TEST_CASE("face that only overflows through inherited hinge work is infeasible") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    // 38mm face fits a 40mm window alone, but not together with the thread
    // laps reaching back across the hinge to the 30mm face's rail
    FlatLayout fl = strip({30, 38}, 3);
    HingeSet hs = plan_hinges(fl, p);
    StitchProgram prog = assemble_program(fl, hs, p);
    FabPlan fab = plan_fabrication(fl, hs, prog, p);
    try {
        partition(fl, prog, fab, p);
        FAIL("expected InfeasiblePartition");
    } catch (const Error& e) {
        CHECK(e.kind == "InfeasiblePartition");
        CHECK(std::string(e.what()).find("face 1") != std::string::npos);
    }
}

TEST_CASE("every later stage shares a registration square with an earlier one") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    Built b = build({30, 30, 30, 30}, 3, p);

    REQUIRE(b.plan.hoops.size() == 4);
    CHECK(assigned_ids(b.plan) == program_ids(b.prog));
    CHECK(b.plan.deps ==
          std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
    CHECK(b.plan.fab_squares == 0);
    CHECK(b.plan.squares.size() == 3);
    CHECK(later_stages_share_a_square(b.plan));
    CHECK(runs_inside_windows(b.plan, b.prog, p));
    CHECK(validate_sequence(b.plan, b.prog, b.fl).empty());

    // stage order is already topological: every dependency points forward
    for (const auto& [a, c] : b.plan.deps) CHECK(a < c);
}

TEST_CASE("audit flags a shrink thread hooped before its anchor face") {
    Params p;
    Built b = build({30, 30}, 3, p);

    HoopPlan bad;
    bad.hoops.resize(2);
    for (const auto& r : b.prog.runs) {
        int h = (r.gap == 0 || r.face == 0) ? 0 : 1;
        bad.hoops[h].runs.push_back(r.id);
    }
    auto v = validate_sequence(bad, b.prog, b.fl);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("hinge 0") != std::string::npos);
    CHECK(v[0].find("face 1") != std::string::npos);
    CHECK(v[0].find("stage 1") != std::string::npos);
    CHECK(v[0].find("stage 2") != std::string::npos);
}

TEST_CASE("stage manifest is deterministic and lists shared squares") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    Built b = build({30, 30}, 3, p);
    std::string m = hoop_manifest(b.plan);
    CHECK(m.find("stages 2") != std::string::npos);
    CHECK(m.find("hoop 1:") != std::string::npos);
    CHECK(m.find("hoop 2:") != std::string::npos);
    CHECK(m.find("shares [0]") != std::string::npos);
    CHECK(m.find("after 1 -> 2") != std::string::npos);

    Built again = build({30, 30}, 3, p);
    CHECK(hoop_manifest(again.plan) == m);
}
