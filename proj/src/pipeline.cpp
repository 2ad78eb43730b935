#include "stitchfold/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

namespace stitchfold {
namespace {

struct StageLog {
    bool on = false;
    std::chrono::steady_clock::time_point t0;
    StageLog() {
        const char* v = std::getenv("STITCHFOLD_LOG");
        on = v && *v;
        t0 = std::chrono::steady_clock::now();
    }
    void mark(const char* stage) {
        if (!on) return;
        auto t1 = std::chrono::steady_clock::now();
        std::fprintf(stderr, "# %-10s %.3fs\n", stage,
                     std::chrono::duration<double>(t1 - t0).count());
        t0 = t1;
    }
};

void put_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("IoError", "cannot write " + path);
    out.write(body.data(), (std::streamsize)body.size());
    if (!out) throw io_error("IoError", "short write to " + path);
}

// The initial development is inflated until nothing overlaps, which can
// scatter a curved model tens of millimeters apart and leave the descent
// an impossible distance to crawl back. Rebuild the compact tree
// development instead (the rotations are untouched by the inflation, only
// the translations moved) and let the overlap term push faces apart
// locally where the surface genuinely has too much material.
void compact_development(WorkingLayout& L, double g0) {
    int F = (int)L.trans.size();
    std::vector<std::vector<int>> kids(F);
    for (int f = 0; f < F; ++f)
        if (L.parent[f] >= 0) kids[L.parent[f]].push_back(f);
    std::vector<const WorkingLayout::IEdge*> up(F, nullptr);
    for (const auto& e : L.edges) {
        if (!e.tree) continue;
        if (L.parent[e.fa] == e.fb) up[e.fa] = &e;
        if (L.parent[e.fb] == e.fa) up[e.fb] = &e;
    }
    L.trans[L.root] = {0, 0};
    std::deque<int> q{L.root};
    while (!q.empty()) {
        int f = q.front();
        q.pop_front();
        for (int g : kids[f]) {
            const auto& e = *up[g];
            bool f_is_a = (e.fa == f);
            Vec2 xf_u = L.intrinsic[f][f_is_a ? e.ua : e.ub];
            Vec2 xg_u = L.intrinsic[g][f_is_a ? e.ub : e.ua];
            Vec2 xf_v = L.intrinsic[f][f_is_a ? e.va : e.vb];
            Vec2 dir = rotate(xf_v - xf_u, L.delta[f]);
            Vec2 n = Vec2{dir.y, -dir.x} / dir.norm();
            if (!f_is_a) n = n * -1.0;
            Vec2 target = rotate(xf_u, L.delta[f]) + L.trans[f] + n * g0;
            L.trans[g] = target - rotate(xg_u, L.delta[g]);
            q.push_back(g);
        }
    }
}

// Widest separation a type-1/2 routing still closes for this edge. Wider
// gaps force double perimeter laps, and a face shared by several of those
// overflows its 6-pass channel budget; keeping routine hinges at type <= 2
// leaves channel room everywhere.
double routing_ceiling(const WorkingLayout& L, const WorkingLayout::IEdge& e, const Params& p) {
    double La = usable_span(dist(L.intrinsic[e.fa][e.ua], L.intrinsic[e.fa][e.va]),
                            p.corner_clearance_mm);
    double Lb = usable_span(dist(L.intrinsic[e.fb][e.ub], L.intrinsic[e.fb][e.vb]),
                            p.corner_clearance_mm);
    double Pa = perimeter_spans(L.intrinsic[e.fa], p.corner_clearance_mm);
    double Pb = perimeter_spans(L.intrinsic[e.fb], p.corner_clearance_mm);
    double lo = p.gap_min_mm, hi = lo;
    auto ok = [&](double s) {
        int t = select_type(La, Lb, Pa, Pb, s, p.shrink_ratio, p.safety_factor);
        return t >= 1 && t <= 2;
    };
    if (!ok(lo)) return lo;
    while (hi < 1e4 && ok(hi * 2 + 1)) hi = hi * 2 + 1;
    double top = hi * 2 + 1;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (hi + top);
        (ok(mid) ? hi : top) = mid;
    }
    return hi;
}

// worst signed gap width in the current state; negative = faces crossed
double worst_separation(const WorkingLayout& L) {
    FlatLayout fl = snapshot(L);
    double w = 1e300;
    for (const auto& g : fl.gaps)
        if (g.alive) w = std::min(w, g.separation());
    return w;
}

void run_ladder(WorkingLayout& L, const Params& p, const std::vector<double>& cap,
                const std::vector<double>& rungs) {
    for (double ceiling : rungs) {
        double floor2 = std::max(ceiling, 2 * p.g0_mm);
        std::vector<double> stage(cap);
        for (double& c : stage) c = std::min(c, floor2);
        set_gap_caps(L, stage);
        optimize(L, p);
    }
}

// Squeeze the layout under the final per-edge caps: the type-2 routing
// bound with 5% headroom (the optimizer treats caps as soft walls, the
// hinge planner's limits are hard). Face rotations are frozen at
// development time, so angular surplus around a negatively curved vertex
// can only leave by faces sliding apart; starting from the compact
// development is fastest but can wedge two faces through each other with
// no way back down the gradient. When that happens, restart from the
// overlap-free inflated development and walk it in through a ladder of
// shrinking ceilings instead.
void settle_layout(WorkingLayout& L, const Params& p) {
    std::vector<Vec2> inflated = L.trans;
    compact_development(L, p.g0_mm);
    std::vector<double> cap = gap_caps(L, p);
    for (size_t i = 0; i < cap.size(); ++i)
        cap[i] = 0.95 * std::min(cap[i], routing_ceiling(L, L.edges[i], p));

    run_ladder(L, p, cap, {60.0, 25.0, 12.0});
    if (worst_separation(L) < 0.2 * p.gap_min_mm) {
        L.trans = inflated;
        double top = 0;
        {
            FlatLayout fl = snapshot(L);
            for (const auto& g : fl.gaps) top = std::max(top, g.separation());
        }
        std::vector<double> rungs;
        for (double c = std::max(30.0, top); c > 14.0; c *= 0.5) rungs.push_back(c);
        run_ladder(L, p, cap, rungs);
    }
    set_gap_caps(L, cap);
    for (int k = 0; k < 6; ++k)
        if (optimize(L, p).converged) break;
}

// Channel paths of different hinges cross freely on a shared face, and the
// pitch sampling can drop two penetrations almost on top of each other at a
// crossing. Penetrations may slide along their own thread path (pitch is a
// guide, not a contract), so nudge the movable side of each close pair
// until the machine margin holds. Coincident holes are shared on purpose
// (fold pairs, lock anchors) and move as one.
void space_penetrations(StitchProgram& prog, double margin) {
    struct Ref {
        int run, idx;
    };
    using Key = std::pair<long long, long long>;
    auto quant = [](const Vec2& v) {
        return Key{(long long)std::llround(v.x * 1e7), (long long)std::llround(v.y * 1e7)};
    };
    // pairs that would not budge (both endpoint-anchored, say); leave them
    // for the spacing check to report rather than stalling on them forever
    std::set<std::pair<Key, Key>> stuck;
    for (int iter = 0; iter < 6000; ++iter) {
        // hole -> every (run, point) stamped there
        std::map<std::pair<long long, long long>, std::vector<Ref>> holes;
        for (const auto& r : prog.runs)
            for (int k = 0; k < (int)r.points.size(); ++k)
                holes[quant(r.points[k].pos)].push_back({r.id, k});

        std::vector<Vec2> pos;
        std::vector<Key> hkey;
        std::vector<const std::vector<Ref>*> group;
        for (auto& [key, refs] : holes) {
            pos.push_back(prog.runs[refs.front().run].points[refs.front().idx].pos);
            hkey.push_back(key);
            group.push_back(&refs);
        }
        std::map<std::pair<long long, long long>, std::vector<int>> grid;
        auto cell = [&](const Vec2& v) {
            return std::make_pair((long long)std::floor(v.x / margin),
                                  (long long)std::floor(v.y / margin));
        };
        for (size_t i = 0; i < pos.size(); ++i) grid[cell(pos[i])].push_back((int)i);

        int va = -1, vb = -1;
        double vd = 0;
        for (size_t i = 0; i < pos.size() && va < 0; ++i) {
            auto [cx, cy] = cell(pos[i]);
            for (long long dx = -1; dx <= 1 && va < 0; ++dx)
                for (long long dy = -1; dy <= 1 && va < 0; ++dy) {
                    auto it = grid.find({cx + dx, cy + dy});
                    if (it == grid.end()) continue;
                    for (int j : it->second) {
                        if (j <= (int)i) continue;
                        double d = dist(pos[i], pos[j]);
                        if (d > 1e-6 && d < margin - 1e-9 &&
                            !stuck.count(std::minmax(hkey[i], hkey[j]))) {
                            va = (int)i;
                            vb = j;
                            vd = d;
                            break;
                        }
                    }
                }
        }
        if (va < 0) return;  // clean

        // Slide one hole along its thread; try the later run first. A hole
        // inside a run may move toward either neighbor; a run-end anchor may
        // only retreat inward along its first (or last) segment, which keeps
        // shared anchors on the primary thread's path. Lock tack grids are
        // rigid at exactly the margin pitch, so their points never slide
        // alone -- the whole cluster shifts as a unit if nothing else gives.
        bool moved = false;
        int first = group[va]->front().run <= group[vb]->front().run ? vb : va;
        for (int pick : {first, first == va ? vb : va}) {
            const auto& refs = *group[pick];
            Vec2 me = pos[pick], other = pos[pick == va ? vb : va];
            bool in_lock = false;
            for (const Ref& rf : refs)
                if (prog.runs[rf.run].tag == "lock") in_lock = true;
            if (in_lock) continue;
            const auto& pts = prog.runs[refs.front().run].points;
            double need = margin - vd + 0.02;
            int k0 = refs.front().idx;
            int nb1 = k0 + 1, nb2 = k0 - 1;
            if (k0 == 0)
                nb2 = nb1;  // anchor at run start: inward only
            else if (k0 + 1 == (int)pts.size())
                nb1 = nb2;  // anchor at run end
            // lead with whichever neighbor direction points away from the clash
            else if (dot(pts[nb2].pos - me, me - other) > dot(pts[nb1].pos - me, me - other))
                std::swap(nb1, nb2);
            for (int nb : {nb1, nb2}) {
                Vec2 seg = pts[nb].pos - me;
                double len = seg.norm();
                if (len < 1e-9) continue;
                Vec2 t = seg / len;
                double step = std::min(need, 0.45 * len);
                if (dist(me + t * step, other) <= vd + 1e-9) continue;  // no gain
                Vec2 np = me + t * step;
                for (const Ref& rf : refs) prog.runs[rf.run].points[rf.idx].pos = np;
                moved = true;
                break;
            }
            if (moved) break;
        }
        // last resort: shift a whole lock cluster away from the intruder
        for (int pick : {va, vb}) {
            if (moved) break;
            int lock_run = -1;
            for (const Ref& rf : *group[pick])
                if (prog.runs[rf.run].tag == "lock") lock_run = rf.run;
            if (lock_run < 0) continue;
            Vec2 me = pos[pick], other = pos[pick == va ? vb : va];
            Vec2 d = me - other;
            double dn = d.norm();
            if (dn < 1e-9) continue;
            Vec2 shift = d / dn * (margin - vd + 0.05);
            std::set<Key> cluster;
            for (const auto& q : prog.runs[lock_run].points) cluster.insert(quant(q.pos));
            for (auto& r : prog.runs)
                for (auto& q : r.points)
                    if (cluster.count(quant(q.pos))) q.pos = q.pos + shift;
            moved = true;
        }
        if (!moved) stuck.insert(std::minmax(hkey[va], hkey[vb]));
    }
}

}  // namespace

void require_disk(const MeshReport& rep) {
    if (rep.is_disk) return;
    char buf[160];
    if (rep.boundary_loops == 0) {
        // closed orientable surface: genus from the euler characteristic
        int g = (2 - rep.euler_characteristic) / 2;
        int cuts = g == 0 ? 1 : 2 * g;
        std::snprintf(buf, sizeof buf,
                      "not a topological disc: closed surface%s; open it with %d cut%s (--cuts)",
                      g > 0 ? " with handles" : "", cuts, cuts == 1 ? "" : "s");
    } else {
        std::snprintf(buf, sizeof buf,
                      "not a topological disc: %d boundary loops (need exactly 1)",
                      rep.boundary_loops);
    }
    throw validation_error("NotADisc", buf);
}

PipelineResult run_pipeline(const TriangleMesh& input, const Params& p) {
    StageLog log;
    PipelineResult r;

    TriangleMesh m = input;
    if (!p.cuts.empty()) m = apply_cuts(m, p.cuts);
    r.analysis = analyze(m);
    require_disk(r.analysis);
    auto rr = enforce_resolution(m, p.min_edge, p.resolution_mode);
    r.mesh = rr.mesh;
    r.scale = rr.scale;
    if (r.scale != 1.0) r.analysis = analyze(r.mesh);
    log.mark("analysis");

    WorkingLayout L = initialize_layout(r.mesh, p);
    settle_layout(L, p);
    r.layout = snapshot(L);
    log.mark("flatten");

    r.events = resolve_all(r.layout, p);
    log.mark("resolve");

    r.hinges = plan_hinges(r.layout, p);
    r.program = assemble_program(r.layout, r.hinges, p);
    space_penetrations(r.program, p.safety_margin);
    check_spacing(r.program, p.safety_margin);
    log.mark("stitches");

    r.fab = plan_fabrication(r.layout, r.hinges, r.program, p);
    validate_fab(r.fab, r.program, p);
    r.hoops = partition(r.layout, r.program, r.fab, p);
    auto order = validate_sequence(r.hoops, r.program, r.layout);
    if (!order.empty()) throw validation_error("SequenceViolation", order.front());
    log.mark("fab+hoops");

    r.fold = reconstruct(r.mesh, r.layout, &r.hinges);
    log.mark("fold check");
    return r;
}

std::string write_outputs(const PipelineResult& r, const Params& p, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_svg(r.fab, r.hoops, r.program, dir + "/sheet.svg");
    put_file(dir + "/resolution.jsonl", to_jsonl(r.events));

    Report rep = make_report(r.layout, r.events, r.hinges, r.hoops, p);
    nlohmann::json j = nlohmann::json::parse(report_json(rep));
    j["scale"] = r.scale;
    j["mesh"] = {{"vertices", r.analysis.vertex_count},
                 {"edges", r.analysis.edge_count},
                 {"faces", r.analysis.face_count},
                 {"boundary_loops", r.analysis.boundary_loops},
                 {"min_edge_mm", r.analysis.min_edge_mm}};
    nlohmann::json fold;
    fold["max_vertex_deviation"] = r.fold.max_vertex_deviation;
    fold["max_edge_residual"] = r.fold.max_edge_residual;
    fold["boundary_edges"] = r.fold.boundary_edges;
    fold["edge_residual"] = nlohmann::json::array();
    for (auto& [id, res] : r.fold.edge_residual) fold["edge_residual"].push_back({{"gap", id}, {"mm", res}});
    fold["merged_deviation"] = nlohmann::json::array();
    for (auto& [id, dev] : r.fold.merged_deviation)
        fold["merged_deviation"].push_back({{"face", id}, {"mm", dev}});
    fold["tuck_ok"] = nlohmann::json::array();
    for (auto& [id, ok] : r.fold.tuck_ok) fold["tuck_ok"].push_back({{"gap", id}, {"ok", ok}});
    j["fold"] = fold;
    put_file(dir + "/report.json", j.dump(2) + "\n");

    char extra[160];
    int tucks = 0;
    for (auto& [id, ok] : r.fold.tuck_ok) tucks += ok ? 1 : 0;
    std::snprintf(extra, sizeof extra,
                  "fold check: vertex deviation %.2e mm, edge residual %.2e mm, tucks %d/%zu\n",
                  r.fold.max_vertex_deviation, r.fold.max_edge_residual, tucks,
                  r.fold.tuck_ok.size());
    return report_text(rep) + extra;
}

}  // namespace stitchfold
