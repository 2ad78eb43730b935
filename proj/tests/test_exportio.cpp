#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "stitchfold/errors.hpp"
#include "stitchfold/exportio.hpp"
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

// two 30mm squares side by side, one hinge
FlatLayout two_squares(double sep) {
    FlatLayout fl;
    fl.faces.push_back(mkface(0, {{0, 0}, {30, 0}, {30, 30}, {0, 30}}));
    fl.faces.push_back(mkface(1, {{30 + sep, 0}, {60 + sep, 0}, {60 + sep, 30}, {30 + sep, 30}}));
    EdgeGap g;
    g.id = 0;
    g.face_a = 0;
    g.face_b = 1;
    g.mesh_u = 0;
    g.mesh_v = 1;
    g.a_u = {30, 0};
    g.a_v = {30, 30};
    g.b_u = {30 + sep, 0};
    g.b_v = {30 + sep, 30};
    g.tree = true;
    g.gap_lo = sep;
    g.gap_hi = 1e9;
    fl.gaps.push_back(g);
    return fl;
}

struct Built {
    FlatLayout fl;
    HingeSet hs;
    StitchProgram prog;
    FabPlan fab;
    HoopPlan plan;
};

Built build_two(double sep, const Params& p) {
    Built b;
    b.fl = two_squares(sep);
    b.hs = plan_hinges(b.fl, p);
    b.prog = assemble_program(b.fl, b.hs, p);
    b.fab = plan_fabrication(b.fl, b.hs, b.prog, p);
    b.plan = partition(b.fl, b.prog, b.fab, p);
    return b;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int count_of(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (size_t i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("calibration pattern exports one cut and one stitch layer") {
    Params p;
    Gauge g = make_gauge(p);
    HoopPlan plan = partition(g.layout, g.program, g.fab, p);
    const std::string path = "/tmp/sf_export_gauge.svg";
    write_svg(g.fab, plan, g.program, path);

    std::string s = slurp(path);
    CHECK(count_of(s, "data-layer=\"cut\"") == 1);
    CHECK(count_of(s, "data-layer=\"stitch-hoop-1\"") == 1);
    CHECK(count_of(s, "stitch-hoop-2") == 0);
    CHECK(s.find("width=\"") != std::string::npos);
    CHECK(s.find("mm\"") != std::string::npos);
    CHECK(s.find("transform") == std::string::npos);
    // every cut path and every run shows up exactly once
    CHECK(count_of(s, "data-kind=\"") == (int)g.fab.cuts.size());
    CHECK(count_of(s, "data-run=\"") == (int)g.program.runs.size());
}

TEST_CASE("written sheets read back identical") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    Built b = build_two(3, p);
    REQUIRE(b.plan.hoops.size() == 2);
    REQUIRE((int)b.plan.squares.size() == b.plan.fab_squares + 1);

    const std::string path = "/tmp/sf_export_pair.svg";
    write_svg(b.fab, b.plan, b.prog, path);
    SvgBundle r = read_svg(path);

    CHECK(program_digest(r.prog) == program_digest(b.prog));
    CHECK(fab_digest(r.fab) == fab_digest(b.fab));
    CHECK(hoop_manifest(r.hoops) == hoop_manifest(b.plan));
    CHECK(r.hoops.deps == b.plan.deps);
    CHECK(r.prog.deps == b.prog.deps);
    CHECK(r.hoops.fab_squares == b.plan.fab_squares);
    REQUIRE(r.hoops.squares.size() == b.plan.squares.size());
    for (size_t i = 0; i < b.plan.squares.size(); ++i)
        for (size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(r.hoops.squares[i].pts[j].x - b.plan.squares[i].pts[j].x) <= 1e-6);
            CHECK(std::abs(r.hoops.squares[i].pts[j].y - b.plan.squares[i].pts[j].y) <= 1e-6);
        }
    // stitch order and hoop assignment survive exactly
    for (size_t k = 0; k < b.plan.hoops.size(); ++k) {
        CHECK(r.hoops.hoops[k].runs == b.plan.hoops[k].runs);
        CHECK(r.hoops.hoops[k].faces == b.plan.hoops[k].faces);
        CHECK(r.hoops.hoops[k].regs == b.plan.hoops[k].regs);
    }

    // printing is a fixed point: exporting the re-read artifacts is byte-identical
    const std::string path2 = "/tmp/sf_export_pair2.svg";
    write_svg(r.fab, r.hoops, r.prog, path2);
    CHECK(slurp(path2) == slurp(path));
}

TEST_CASE("empty artifacts still make a valid document") {
    const std::string path = "/tmp/sf_export_empty.svg";
    write_svg(FabPlan{}, HoopPlan{}, StitchProgram{}, path);
    std::string s = slurp(path);
    CHECK(count_of(s, "data-layer=\"cut\"") == 1);
    CHECK(count_of(s, "stitch-hoop") == 0);

    SvgBundle r = read_svg(path);
    CHECK(r.fab.cuts.empty());
    CHECK(r.hoops.hoops.empty());
    CHECK(r.prog.runs.empty());
}

TEST_CASE("foreign vector files are rejected") {
    const std::string plain = "/tmp/sf_export_foreign.svg";
    {
        std::ofstream f(plain);
        f << "<?xml version=\"1.0\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\">"
             "<rect width=\"5\" height=\"5\"/></svg>\n";
    }
    try {
        read_svg(plain);
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(e.kind == "FormatError");
    }

    const std::string tampered = "/tmp/sf_export_tampered.svg";
    {
        std::ofstream f(tampered);
        f << "<svg data-generator=\"stitchfold\" data-fab-squares=\"0\" data-hoop-deps=\"\" "
             "data-run-deps=\"\"><g data-layer=\"doodles\"></g></svg>\n";
    }
    try {
        read_svg(tampered);
        FAIL("expected FormatError");
    } catch (const Error& e) {
        CHECK(e.kind == "FormatError");
        CHECK(std::string(e.what()).find("doodles") != std::string::npos);
    }
}

TEST_CASE("report counts what the pipeline did") {
    Params p;
    p.hoop_w_mm = 60;
    p.hoop_h_mm = 60;
    Built b = build_two(3, p);

    std::vector<ResolutionEvent> log(3);
    log[0].action = "merged";
    log[1].action = "split";
    log[2].action = "skipped";

    Report r = make_report(b.fl, log, b.hs, b.plan, p);
    CHECK(r.faces == 2);
    CHECK(r.merges == 1);
    CHECK(r.resolved == 2);
    CHECK(r.hoops == 2);

    // the histogram covers every hinge of the final layout
    int alive_gaps = 0;
    for (const auto& g : b.fl.gaps)
        if (g.alive) ++alive_gaps;
    CHECK(r.hinge_histogram[0] + r.hinge_histogram[1] + r.hinge_histogram[2] +
              r.hinge_histogram[3] ==
          alive_gaps);
    CHECK(r.hinge_histogram[0] == 1);

    std::string text = report_text(r);
    CHECK(text.find("faces 2") != std::string::npos);
    CHECK(text.find("hinges by type 1,0,0,0") != std::string::npos);
    CHECK(text.find("hoop_size = 60x60") != std::string::npos);

    auto j = nlohmann::json::parse(report_json(r));
    CHECK(j["schema"] == 1);
    CHECK(j["faces"] == 2);
    CHECK(j["merges"] == 1);
    CHECK(j["overlaps_resolved"] == 2);
    CHECK(j["hoops"] == 2);
    CHECK(j["hinge_histogram"][0] == 1);
}
