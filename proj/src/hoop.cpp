#include "stitchfold/hoop.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include "stitchfold/errors.hpp"
#include "stitchfold/geom.hpp"

namespace stitchfold {

namespace {

BBox run_bbox(const StitchRun& r) {
    BBox b;
    for (const auto& np : r.points) b.add(np.pos);
    return b;
}

// Stitch order inside one hoop: structural anchoring first, then crease
// work, then the shrinking threads that loop through it, then the holds
// that pin them down.
int stage_rank(const std::string& tag) {
    if (tag == "fold") return 1;
    if (tag == "shrink") return 2;
    if (tag == "hold") return 3;
    return 0;
}

bool fits_window(const BBox& b, double w, double h) {
    Vec2 s = b.size();
    return s.x <= w + 1e-9 && s.y <= h + 1e-9;
}

// Placement probe for a fresh registration square: it must sit in waste
// fabric, clear of everything that stays (faces, hinge bands) and of squares
// already in the plan.
struct SquareScout {
    std::vector<Poly> fabric;
    std::vector<Poly> cuts;
    double half = 0, keep_fabric = 0, keep_cut = 0;

    bool clear_at(const Vec2& c) const {
        Vec2 q[5] = {{c.x - half, c.y - half},
                     {c.x + half, c.y - half},
                     {c.x + half, c.y + half},
                     {c.x - half, c.y + half},
                     {c.x - half, c.y - half}};
        auto ok = [&](const std::vector<Poly>& obs, double keep) {
            for (const auto& poly : obs) {
                if (point_in_polygon(c, poly)) return false;
                size_t n = poly.size();
                for (size_t i = 0; i < n; ++i) {
                    const Vec2& a = poly[i];
                    const Vec2& b = poly[(i + 1) % n];
                    for (int e = 0; e < 4; ++e)
                        if (segment_segment_dist(q[e], q[e + 1], a, b) < keep - 1e-9) return false;
                }
            }
            return true;
        };
        return ok(fabric, keep_fabric) && ok(cuts, keep_cut);
    }
};

}  // namespace

HoopPlan partition(const FlatLayout& fl, const StitchProgram& prog, const FabPlan& fab,
                   const Params& p) {
    const double win_w = p.hoop_w_mm - 2 * p.hoop_margin_mm;
    const double win_h = p.hoop_h_mm - 2 * p.hoop_margin_mm;
    if (win_w <= 0 || win_h <= 0)
        throw validation_error("InfeasiblePartition", "hoop margins leave no stitchable window");

    // Per-face extent: the polygon plus its own lock/channel work. Hinge
    // work is tracked per gap because it lands wherever the later face does.
    std::map<int, BBox> fext;
    for (const auto& f : fl.faces)
        if (f.alive) fext[f.id] = polygon_bbox(f.poly);
    for (const auto& r : prog.runs)
        if (r.face >= 0) {
            auto it = fext.find(r.face);
            if (it != fext.end()) it->second.add(run_bbox(r));
        }

    std::map<int, std::pair<int, int>> gfaces;
    std::map<int, BBox> gext;
    for (const auto& g : fl.gaps)
        if (g.alive) gfaces[g.id] = {g.face_a, g.face_b};
    for (const auto& r : prog.runs)
        if (r.gap >= 0 && gfaces.count(r.gap)) gext[r.gap].add(run_bbox(r));

    for (const auto& [id, b] : fext)
        if (!fits_window(b, win_w, win_h)) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "face %d needs %.1fx%.1fmm but the stitchable window is %.1fx%.1fmm", id,
                          b.size().x, b.size().y, win_w, win_h);
            throw validation_error("RunTooLarge", buf);
        }

    std::map<int, std::vector<int>> adj;
    for (const auto& [gid, pr] : gfaces) {
        adj[pr.first].push_back(pr.second);
        adj[pr.second].push_back(pr.first);
    }
    for (auto& [id, v] : adj) {
        (void)id;
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    auto leftmost_unassigned = [&](const std::map<int, int>& done) {
        int best = -1;
        for (const auto& [id, b] : fext) {
            if (done.count(id)) continue;
            if (best < 0 || std::make_tuple(b.lo.x, b.lo.y, id) <
                                std::make_tuple(fext.at(best).lo.x, fext.at(best).lo.y, best))
                best = id;
        }
        return best;
    };

    // Greedy growth: keep admitting discovered faces while the stage still
    // fits the window; what doesn't fit waits for the next clamping. A face
    // joining a stage drags in the hinge work shared with already-placed
    // faces, so the fit test sees cross-stage thread extents too.
    std::map<int, int> face_hoop;
    std::vector<std::vector<int>> hoop_faces;
    std::vector<BBox> hoop_content;
    std::deque<int> pending;
    std::set<int> seen;
    const size_t total = fext.size();
    size_t placed = 0;
    while (placed < total) {
        if (pending.empty()) {
            int s = leftmost_unassigned(face_hoop);
            pending.push_back(s);
            seen.insert(s);
        }
        int h = (int)hoop_faces.size();
        hoop_faces.emplace_back();
        hoop_content.emplace_back();
        std::deque<int> queue;
        queue.swap(pending);
        bool progress = false;
        while (!queue.empty()) {
            int f = queue.front();
            queue.pop_front();
            if (face_hoop.count(f)) continue;
            BBox c = hoop_content[h];
            c.add(fext.at(f));
            for (const auto& [gid, pr] : gfaces) {
                int other = pr.first == f ? pr.second : pr.second == f ? pr.first : -1;
                if (other < 0 || !face_hoop.count(other)) continue;
                auto it = gext.find(gid);
                if (it != gext.end()) c.add(it->second);
            }
            if (!fits_window(c, win_w, win_h)) {
                pending.push_back(f);
                continue;
            }
            face_hoop[f] = h;
            hoop_faces[h].push_back(f);
            hoop_content[h] = c;
            ++placed;
            progress = true;
            for (int nb : adj[f])
                if (!face_hoop.count(nb) && seen.insert(nb).second) queue.push_back(nb);
        }
        if (!progress) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "face %d fits the window alone but not together with its cross-stage "
                          "hinge work",
                          pending.front());
            throw validation_error("InfeasiblePartition", buf);
        }
    }

    // Window boxes anchor at the stage content so the unused window area
    // spills toward later stages, which is where shared registration squares
    // have to live.
    HoopPlan plan;
    for (size_t h = 0; h < hoop_faces.size(); ++h) {
        Hoop hp;
        hp.lo = hoop_content[h].lo - Vec2{p.hoop_margin_mm, p.hoop_margin_mm};
        hp.hi = hp.lo + Vec2{p.hoop_w_mm, p.hoop_h_mm};
        hp.faces = hoop_faces[h];
        plan.hoops.push_back(hp);
    }

    std::map<int, int> run_hoop;
    for (const auto& r : prog.runs) {
        int h = -1;
        if (r.face >= 0) {
            auto it = face_hoop.find(r.face);
            if (it != face_hoop.end()) h = it->second;
        } else if (r.gap >= 0) {
            auto it = gfaces.find(r.gap);
            if (it != gfaces.end())
                h = std::max(face_hoop.at(it->second.first), face_hoop.at(it->second.second));
        }
        if (h < 0) continue;
        run_hoop[r.id] = h;
        plan.hoops[h].runs.push_back(r.id);
    }
    std::map<int, int> rank;
    for (const auto& r : prog.runs) rank[r.id] = stage_rank(r.tag);
    for (auto& hp : plan.hoops)
        std::stable_sort(hp.runs.begin(), hp.runs.end(), [&](int a, int b) {
            int ra = rank.at(a), rb = rank.at(b);
            return ra != rb ? ra < rb : a < b;
        });

    std::set<std::pair<int, int>> edges;
    for (const auto& [gid, pr] : gfaces) {
        (void)gid;
        int a = face_hoop.at(pr.first), b = face_hoop.at(pr.second);
        if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
    }
    for (const auto& [a, b] : prog.deps) {
        auto ia = run_hoop.find(a), ib = run_hoop.find(b);
        if (ia == run_hoop.end() || ib == run_hoop.end()) continue;
        if (ia->second != ib->second) edges.insert({ia->second, ib->second});
    }
    plan.deps.assign(edges.begin(), edges.end());

    // A hoop references every registration square its stitchable window
    // covers; that is what the machine can reproduce on the stabilizer.
    for (const auto& c : fab.cuts)
        if (c.kind == CutPath::Kind::registration_square) plan.squares.push_back(c);
    plan.fab_squares = (int)plan.squares.size();

    auto in_window = [&](const CutPath& s, const Hoop& hp) {
        if (s.pts.empty()) return false;
        for (const auto& q : s.pts)
            if (q.x < hp.lo.x + p.hoop_margin_mm - 1e-9 ||
                q.x > hp.hi.x - p.hoop_margin_mm + 1e-9 ||
                q.y < hp.lo.y + p.hoop_margin_mm - 1e-9 ||
                q.y > hp.hi.y - p.hoop_margin_mm + 1e-9)
                return false;
        return true;
    };
    for (auto& hp : plan.hoops)
        for (int i = 0; i < (int)plan.squares.size(); ++i)
            if (in_window(plan.squares[i], hp)) hp.regs.push_back(i);

    // Alignment needs every later stage to see a square an earlier stage
    // already fixed. When the hole squares don't provide one, cut a new
    // square into waste inside the window overlap.
    SquareScout scout;
    for (const auto& f : fl.faces)
        if (f.alive) scout.fabric.push_back(f.poly);
    for (const auto& g : fl.gaps)
        if (g.alive) scout.fabric.push_back(g.band());
    for (const auto& s : plan.squares) scout.cuts.push_back(s.pts);
    scout.half = p.reg_square_mm / 2;
    scout.keep_fabric = p.cut_clearance_mm + 0.5;
    scout.keep_cut = 1.0;

    for (size_t k = 1; k < plan.hoops.size(); ++k) {
        std::set<int> earlier;
        for (size_t j = 0; j < k; ++j)
            earlier.insert(plan.hoops[j].regs.begin(), plan.hoops[j].regs.end());
        bool shared = false;
        for (int id : plan.hoops[k].regs)
            if (earlier.count(id)) {
                shared = true;
                break;
            }
        if (shared) continue;
        bool made = false;
        for (size_t j = 0; j < k && !made; ++j) {
            const double m = p.hoop_margin_mm, half = scout.half;
            double x0 = std::max(plan.hoops[j].lo.x, plan.hoops[k].lo.x) + m + half;
            double x1 = std::min(plan.hoops[j].hi.x, plan.hoops[k].hi.x) - m - half;
            double y0 = std::max(plan.hoops[j].lo.y, plan.hoops[k].lo.y) + m + half;
            double y1 = std::min(plan.hoops[j].hi.y, plan.hoops[k].hi.y) - m - half;
            for (double y = y0; y <= y1 + 1e-9 && !made; y += 2.0)
                for (double x = x0; x <= x1 + 1e-9; x += 2.0) {
                    if (!scout.clear_at({x, y})) continue;
                    CutPath sq;
                    sq.kind = CutPath::Kind::registration_square;
                    sq.closed = true;
                    sq.pts = {{x - half, y - half},
                              {x + half, y - half},
                              {x + half, y + half},
                              {x - half, y + half}};
                    int id = (int)plan.squares.size();
                    plan.squares.push_back(sq);
                    scout.cuts.push_back(sq.pts);
                    plan.hoops[j].regs.push_back(id);
                    plan.hoops[k].regs.push_back(id);
                    made = true;
                    break;
                }
        }
        if (!made) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "no clear waste spot for a registration square shared with stage %zu",
                          k + 1);
            throw validation_error("InfeasiblePartition", buf);
        }
    }
    for (auto& hp : plan.hoops) std::sort(hp.regs.begin(), hp.regs.end());
    return plan;
}

std::vector<std::string> validate_sequence(const HoopPlan& plan, const StitchProgram& prog,
                                           const FlatLayout& fl) {
    std::map<int, int> run_hoop;
    for (size_t h = 0; h < plan.hoops.size(); ++h)
        for (int id : plan.hoops[h].runs) run_hoop[id] = (int)h;

    // A face counts as stitched once all of its structural work is done.
    std::map<int, int> face_last;
    for (const auto& r : prog.runs) {
        if (r.face < 0 || (r.tag != "lock" && r.tag != "channel")) continue;
        auto it = run_hoop.find(r.id);
        if (it == run_hoop.end()) continue;
        auto [fit, fresh] = face_last.try_emplace(r.face, it->second);
        if (!fresh) fit->second = std::max(fit->second, it->second);
    }

    std::map<int, std::pair<int, int>> gfaces;
    for (const auto& g : fl.gaps) gfaces[g.id] = {g.face_a, g.face_b};

    std::vector<std::string> out;
    std::set<std::pair<int, int>> flagged;
    for (const auto& r : prog.runs) {
        if (r.tag != "shrink") continue;
        auto hit = run_hoop.find(r.id);
        auto git = gfaces.find(r.gap);
        if (hit == run_hoop.end() || git == gfaces.end()) continue;
        for (int f : {git->second.first, git->second.second}) {
            auto fit = face_last.find(f);
            if (fit == face_last.end() || fit->second <= hit->second) continue;
            if (!flagged.insert({r.gap, f}).second) continue;
            char buf[200];
            std::snprintf(buf, sizeof buf,
                          "shrink thread of hinge %d is looped in at stage %d before face %d is "
                          "stitched at stage %d",
                          r.gap, hit->second + 1, f, fit->second + 1);
            out.push_back(buf);
        }
    }
    return out;
}

std::string hoop_manifest(const HoopPlan& plan) {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "stages %zu\n", plan.hoops.size());
    out += buf;
    std::set<int> earlier;
    for (size_t h = 0; h < plan.hoops.size(); ++h) {
        const Hoop& hp = plan.hoops[h];
        std::snprintf(buf, sizeof buf, "hoop %zu: box (%.3f,%.3f)-(%.3f,%.3f) faces %zu runs %zu",
                      h + 1, hp.lo.x, hp.lo.y, hp.hi.x, hp.hi.y, hp.faces.size(), hp.runs.size());
        out += buf;
        out += " squares [";
        for (size_t i = 0; i < hp.regs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%d", i ? " " : "", hp.regs[i]);
            out += buf;
        }
        out += "]";
        if (h) {
            out += " shares [";
            bool first = true;
            for (int id : hp.regs)
                if (earlier.count(id)) {
                    std::snprintf(buf, sizeof buf, "%s%d", first ? "" : " ", id);
                    out += buf;
                    first = false;
                }
            out += "]";
        }
        out += "\n";
        earlier.insert(hp.regs.begin(), hp.regs.end());
    }
    for (const auto& [a, b] : plan.deps) {
        std::snprintf(buf, sizeof buf, "after %d -> %d\n", a + 1, b + 1);
        out += buf;
    }
    return out;
}

}  // namespace stitchfold
