#include "stitchfold/fabplan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "stitchfold/errors.hpp"
#include "stitchfold/geom.hpp"

namespace stitchfold {
namespace {

namespace bg = boost::geometry;
using BPt = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPt, false, true>;  // CCW, closed
using BMulti = bg::model::multi_polygon<BPoly>;

BPoly to_bpoly(const Poly& p) {
    BPoly bp;
    for (auto& q : p) bg::append(bp.outer(), BPt(q.x, q.y));
    bg::correct(bp);
    return bp;
}

template <typename Ring>
Poly from_ring(const Ring& ring) {
    Poly out;
    for (size_t i = 0; i + 1 < ring.size(); ++i)  // drop the closing duplicate
        out.push_back({bg::get<0>(ring[i]), bg::get<1>(ring[i])});
    return out;
}

// stable start vertex so downstream arc positions don't depend on library internals
void normalize_ring(Poly& r) {
    if (r.empty()) return;
    auto it = std::min_element(r.begin(), r.end(), [](const Vec2& a, const Vec2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    std::rotate(r.begin(), it, r.end());
}

BMulti inflate(const Poly& p, double by) {
    bg::strategy::buffer::distance_symmetric<double> dist(by);
    bg::strategy::buffer::side_straight side;
    bg::strategy::buffer::join_miter join(5.0);
    bg::strategy::buffer::end_flat end;
    bg::strategy::buffer::point_square point;
    BMulti out;
    bg::buffer(to_bpoly(p), out, dist, side, join, end, point);
    return out;
}

double ring_length(const Poly& r) {
    double L = 0;
    for (size_t i = 0; i < r.size(); ++i) L += dist(r[i], r[(i + 1) % r.size()]);
    return L;
}

Vec2 ring_at(const Poly& r, double arc) {
    double L = ring_length(r);
    arc = std::fmod(arc, L);
    if (arc < 0) arc += L;
    for (size_t i = 0; i < r.size(); ++i) {
        Vec2 a = r[i], b = r[(i + 1) % r.size()];
        double e = dist(a, b);
        if (arc <= e) return e < 1e-12 ? a : lerp(a, b, arc / e);
        arc -= e;
    }
    return r.front();
}

// open polyline along the ring from one arc to another (forward)
std::vector<Vec2> ring_walk(const Poly& r, double from, double to) {
    double L = ring_length(r);
    while (to <= from) to += L;
    std::vector<Vec2> out{ring_at(r, from)};
    double acc = 0;
    std::vector<double> varc(r.size());
    for (size_t i = 0; i < r.size(); ++i) {
        varc[i] = acc;
        acc += dist(r[i], r[(i + 1) % r.size()]);
    }
    for (int lap = 0; lap < 2; ++lap)
        for (size_t i = 0; i < r.size(); ++i) {
            double a = varc[i] + lap * L;
            if (a > from + 1e-9 && a < to - 1e-9) out.push_back(r[i]);
        }
    out.push_back(ring_at(r, to));
    return out;
}

double dist_to_quad(const Vec2& q, const Poly& quad) {
    if (point_in_polygon(q, quad)) return 0;
    double d = 1e300;
    for (size_t i = 0; i < quad.size(); ++i)
        d = std::min(d, point_segment_dist(q, quad[i], quad[(i + 1) % quad.size()]));
    return d;
}

// Split one removal (or outline) ring into a cut polyline plus a tab bridge,
// the tab centered where the ring runs farthest from every hinge band.
void emit_loop(std::vector<CutPath>& cuts, const Poly& ring, CutPath::Kind kind, int hole,
               const std::vector<Poly>& bands, const Params& p) {
    double L = ring_length(ring);
    if (L < p.tab_width_mm + 2 * p.min_cut_mm) return;  // dust-sized: leave attached, uncut
    double best_arc = 0, best_d = -1, acc = 0;
    for (size_t i = 0; i < ring.size(); ++i) {
        Vec2 a = ring[i], b = ring[(i + 1) % ring.size()];
        double e = dist(a, b);
        int steps = std::max(1, (int)std::ceil(e / 5.0));
        for (int k = 0; k < steps; ++k) {
            double t = double(k) / steps;
            Vec2 q = lerp(a, b, t);
            double d = 1e300;
            for (const Poly& band : bands) d = std::min(d, dist_to_quad(q, band));
            if (d > best_d + 1e-9) {
                best_d = d;
                best_arc = acc + e * t;
            }
        }
        acc += e;
    }
    double half = p.tab_width_mm / 2;
    CutPath cut;
    cut.kind = kind;
    cut.hole = hole;
    cut.pts = ring_walk(ring, best_arc + half, best_arc + L - half);
    cuts.push_back(std::move(cut));
    CutPath tab;
    tab.kind = CutPath::Kind::tab_bridge;
    tab.hole = hole;
    tab.pts = ring_walk(ring, best_arc - half, best_arc + half);
    cuts.push_back(std::move(tab));
}

// largest axis-aligned registration square that the hole core can host, if any
void emit_registration(std::vector<CutPath>& cuts, const Poly& hole_core, int hole,
                       const Params& p) {
    BMulti eroded = inflate(hole_core, -0.5);
    if (eroded.empty()) return;
    double half = p.reg_square_mm / 2;
    auto fits = [&](const Vec2& c) {
        BPoly sq;
        const double off[4][2] = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
        for (auto& o : off) bg::append(sq.outer(), BPt(c.x + o[0], c.y + o[1]));
        bg::correct(sq);
        for (const auto& ep : eroded)
            if (bg::within(sq, ep)) return true;
        return false;
    };
    Vec2 cand;
    BPt ctr(0, 0);
    bg::centroid(eroded, ctr);
    cand = {bg::get<0>(ctr), bg::get<1>(ctr)};
    if (!fits(cand)) {
        bg::model::box<BPt> bb;
        bg::envelope(eroded, bb);
        bool found = false;
        for (double y = bg::get<bg::min_corner, 1>(bb); y <= bg::get<bg::max_corner, 1>(bb) && !found;
             y += 2.0)
            for (double x = bg::get<bg::min_corner, 0>(bb); x <= bg::get<bg::max_corner, 0>(bb);
                 x += 2.0)
                if (fits({x, y})) {
                    cand = {x, y};
                    found = true;
                    break;
                }
        if (!found) return;
    }
    CutPath sq;
    sq.kind = CutPath::Kind::registration_square;
    sq.closed = true;
    sq.hole = hole;
    sq.pts = {{cand.x - half, cand.y - half},
              {cand.x + half, cand.y - half},
              {cand.x + half, cand.y + half},
              {cand.x - half, cand.y + half}};
    cuts.push_back(std::move(sq));
}

}  // namespace

const char* to_string(CutPath::Kind k) {
    switch (k) {
        case CutPath::Kind::crease_dash: return "crease_dash";
        case CutPath::Kind::outline: return "outline";
        case CutPath::Kind::excess_removal: return "excess_removal";
        case CutPath::Kind::tab_bridge: return "tab_bridge";
        case CutPath::Kind::registration_square: return "registration_square";
    }
    return "?";
}

std::vector<std::pair<double, double>> dash_sections(double len, double bridge_u, double bridge_v,
                                                     double bridge, double min_cut) {
    if (len < 3 * bridge + 2 * min_cut) {
        char buf[128];
        snprintf(buf, sizeof buf, "crease of %.2fmm cannot hold three %.2fmm bridges and two cuts",
                 len, bridge);
        throw validation_error("CreaseTooShort", buf);
    }
    double mid = len / 2;
    std::pair<double, double> a{bridge_u, mid - bridge / 2};
    std::pair<double, double> b{mid + bridge / 2, len - bridge_v};
    if (a.second - a.first < min_cut || b.second - b.first < min_cut) return {};
    return {a, b};
}

FabPlan plan_fabrication(const FlatLayout& fl, const HingeSet& hs, const StitchProgram& prog,
                         const Params& p) {
    FabPlan plan;
    std::map<int, const HingePlan*> plan_of;
    for (const auto& pl : hs.plans) plan_of[pl.gap_id] = &pl;

    // kept fabric, every piece pre-inflated by the cut clearance; the union's
    // outer rings are then the outline cuts and its holes the removal loops,
    // both already offset away from the stitched regions
    std::vector<Poly> bands;
    BMulti sheet;
    auto add = [&](const Poly& piece) {
        BMulti grown = inflate(piece, p.cut_clearance_mm);
        BMulti merged;
        bg::union_(sheet, grown, merged);
        sheet = std::move(merged);
    };
    for (const auto& f : fl.faces)
        if (f.alive) add(f.poly);
    for (const auto& g : fl.gaps)
        if (g.alive) {
            bands.push_back(g.band());
            add(bands.back());
        }

    int hole_id = 0;
    for (const auto& poly : sheet) {
        Poly outer = from_ring(poly.outer());
        normalize_ring(outer);
        emit_loop(plan.cuts, outer, CutPath::Kind::outline, -1, bands, p);
        for (const auto& inner : poly.inners()) {
            Poly hole = from_ring(inner);
            std::reverse(hole.begin(), hole.end());  // interior rings arrive clockwise
            normalize_ring(hole);
            emit_loop(plan.cuts, hole, CutPath::Kind::excess_removal, hole_id, bands, p);
            emit_registration(plan.cuts, hole, hole_id, p);
            ++hole_id;
        }
    }

    // dashed crease cuts down the bands; scoring happens after embroidery, so
    // every bridge widens to cover the threads that cross its end of the crease
    for (const auto& g : fl.gaps) {
        if (!g.alive) continue;
        const HingePlan* pl = plan_of.at(g.id);
        double s = g.separation();
        double amp = std::clamp(s / 2 - 1.0, 0.3, 0.6);
        std::vector<double> blends{0.5};
        if (pl->type == 4) {
            blends.push_back(1.0 / 3);
            blends.push_back(2.0 / 3);
        }
        for (double w : blends) {
            if (s * std::min(w, 1 - w) - amp < p.cut_clearance_mm - 1e-6)
                continue;  // the zigzag anchors leave no room beside this line
            Vec2 eu = lerp(g.a_u, g.b_u, w), ev = lerp(g.a_v, g.b_v, w);
            double L = dist(eu, ev);
            double bu = p.bridge_len_mm, bv = p.bridge_len_mm;
            for (const auto& r : prog.runs) {
                if (r.thread != ThreadRole::shrink && r.thread != ThreadRole::soluble_bobbin)
                    continue;
                for (size_t i = 1; i < r.points.size(); ++i) {
                    auto hit = segment_intersect(eu, ev, r.points[i - 1].pos, r.points[i].pos);
                    if (!hit) continue;
                    double arc = hit->t * L;
                    if (arc <= L / 2)
                        bu = std::max(bu, arc + p.cut_clearance_mm);
                    else
                        bv = std::max(bv, L - arc + p.cut_clearance_mm);
                }
            }
            Vec2 t = (ev - eu) / L;
            for (auto [lo, hi] : dash_sections(L, bu, bv, p.bridge_len_mm, p.min_cut_mm)) {
                CutPath c;
                c.kind = CutPath::Kind::crease_dash;
                c.gap = g.id;
                c.pts = {eu + t * lo, eu + t * hi};
                plan.cuts.push_back(std::move(c));
            }
        }
    }
    return plan;
}

void validate_fab(const FabPlan& plan, const StitchProgram& prog, const Params& p) {
    char buf[256];
    for (const auto& c : plan.cuts) {
        if (c.kind == CutPath::Kind::tab_bridge) continue;
        size_t n = c.pts.size();
        if (n < 2) continue;
        size_t nseg = c.closed ? n : n - 1;
        for (size_t i = 0; i < nseg; ++i) {
            Vec2 a = c.pts[i], b = c.pts[(i + 1) % n];
            BBox box;
            box.add(a);
            box.add(b);
            for (const auto& r : prog.runs) {
                for (size_t j = 0; j < r.points.size(); ++j) {
                    const Vec2& q = r.points[j].pos;
                    if (q.x < box.lo.x - p.cut_clearance_mm || q.x > box.hi.x + p.cut_clearance_mm ||
                        q.y < box.lo.y - p.cut_clearance_mm || q.y > box.hi.y + p.cut_clearance_mm)
                        continue;
                    double d = point_segment_dist(q, a, b);
                    if (d < p.cut_clearance_mm - 1e-6) {
                        snprintf(buf, sizeof buf,
                                 "%s cut at (%.3f,%.3f)-(%.3f,%.3f) passes %.3fmm from a needle "
                                 "point of run %d, clearance is %.3fmm",
                                 to_string(c.kind), a.x, a.y, b.x, b.y, d, r.id,
                                 p.cut_clearance_mm);
                        throw validation_error("CutTooClose", buf);
                    }
                }
                for (size_t j = 1; j < r.points.size(); ++j)
                    if (segment_intersect(a, b, r.points[j - 1].pos, r.points[j].pos)) {
                        snprintf(buf, sizeof buf,
                                 "%s cut at (%.3f,%.3f)-(%.3f,%.3f) severs the thread of run %d",
                                 to_string(c.kind), a.x, a.y, b.x, b.y, r.id);
                        throw validation_error("CutCrossesThread", buf);
                    }
            }
        }
    }
}

std::string fab_digest(const FabPlan& plan) {
    std::string out;
    char buf[128];
    auto z = [](double v) { return v == 0 ? 0.0 : v; };
    for (const auto& c : plan.cuts) {
        snprintf(buf, sizeof buf, "cut %s g%d h%d %s\n", to_string(c.kind), c.gap, c.hole,
                 c.closed ? "closed" : "open");
        out += buf;
        for (const auto& q : c.pts) {
            snprintf(buf, sizeof buf, "  %.6f %.6f\n", z(q.x), z(q.y));
            out += buf;
        }
    }
    return out;
}

Gauge make_gauge(const Params& p) {
    Gauge g;
    double e = p.min_edge;
    double h = e * std::sqrt(3.0) / 2;
    // the widest gap a plain span-and-crossing thread can still close, with a
    // tenth held back so the selection never sits on the boundary
    double s = 0.9 * p.shrink_ratio * 2 * p.min_span_mm / (p.safety_factor - p.shrink_ratio);

    LayoutFace a;
    a.id = 0;
    a.poly = {{0, 0}, {e, 0}, {e / 2, h}};
    a.sources.push_back({0, {}});
    LayoutFace b;
    b.id = 1;
    b.poly = {{e, -s}, {0, -s}, {e / 2, -s - h}};
    b.sources.push_back({1, {}});
    g.layout.faces = {a, b};

    EdgeGap eg;
    eg.id = 0;
    eg.face_a = 0;
    eg.face_b = 1;
    eg.mesh_u = -1;
    eg.mesh_v = -1;
    eg.a_u = {0, 0};
    eg.a_v = {e, 0};
    eg.b_u = {0, -s};
    eg.b_v = {e, -s};
    eg.tree = true;
    eg.gap_lo = s;
    eg.gap_hi = 1e9;
    g.layout.gaps.push_back(eg);

    g.hinges = plan_hinges(g.layout, p);
    g.program = assemble_program(g.layout, g.hinges, p);
    g.fab = plan_fabrication(g.layout, g.hinges, g.program, p);
    return g;
}

}  // namespace stitchfold
