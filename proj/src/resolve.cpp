#include "stitchfold/resolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "stitchfold/errors.hpp"

namespace stitchfold {

namespace {

double seg_angle_deg(const Vec2& d1, const Vec2& d2) {
    Vec2 a = d1.normalized(), b = d2.normalized();
    double s = std::abs(cross(a, b)), c = std::abs(dot(a, b));
    return std::atan2(s, c) * 180.0 / M_PI;  // folded into [0, 90]
}

double poly_boundary_dist(const Poly& poly, const Vec2& q) {
    double best = 1e300;
    for (size_t i = 0; i < poly.size(); ++i)
        best = std::min(best, point_segment_dist(q, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

// every vertex of `small` inside `big` or within tol of its boundary
bool absorbable(const Poly& small, const Poly& big, double tol) {
    for (const Vec2& v : small)
        if (!point_in_polygon(v, big) && poly_boundary_dist(big, v) > tol) return false;
    return true;
}

double left_area(const Poly& poly, const Line& ln) {
    double sum = 0;
    for (const Poly& piece : split_polygon(poly, ln)) sum += polygon_area(piece);
    return sum;
}

// longest boundary side of `poly` lying on `ln`, as an interval along ln.d
bool longest_chord(const Poly& poly, const Line& ln, double* t0, double* t1) {
    double best = -1;
    for (size_t i = 0; i < poly.size(); ++i) {
        const Vec2 &a = poly[i], &b = poly[(i + 1) % poly.size()];
        if (std::abs(ln.signed_dist(a)) > 1e-6 || std::abs(ln.signed_dist(b)) > 1e-6) continue;
        double ta = dot(a - ln.p, ln.d), tb = dot(b - ln.p, ln.d);
        if (ta > tb) std::swap(ta, tb);
        if (tb - ta > best) {
            best = tb - ta;
            *t0 = ta;
            *t1 = tb;
        }
    }
    return best > 0;
}

// Trim one side of a gap to the kept half-plane; the cut is mirrored across
// the pre-trim midline so the two edge images stay congruent reflections.
bool trim_gap_to(EdgeGap& g, bool side_a, const Line& keep) {
    Vec2& pu = side_a ? g.a_u : g.b_u;
    Vec2& pv = side_a ? g.a_v : g.b_v;
    Vec2& qu = side_a ? g.b_u : g.a_u;
    Vec2& qv = side_a ? g.b_v : g.a_v;
    double du = keep.signed_dist(pu), dv = keep.signed_dist(pv);
    const double eps = 1e-9;
    if (du >= -eps && dv >= -eps) return true;
    if (du <= eps && dv <= eps) return false;
    Line m = g.midline();
    double t = du / (du - dv);
    Vec2 c = lerp(pu, pv, t);
    if (du < 0) {
        pu = c;
        qu = m.reflect(c);
    } else {
        pv = c;
        qv = m.reflect(c);
    }
    return true;
}

struct Ctx {
    FlatLayout& fl;
    const Params& p;
    std::vector<ResolutionEvent>& log;
    int round = 0;
};

int retarget_gaps(FlatLayout& fl, int from, int to) {
    int killed = 0;
    for (auto& g : fl.gaps) {
        if (!g.alive) continue;
        if (g.face_a == from) g.face_a = to;
        if (g.face_b == from) g.face_b = to;
        if (g.face_a == g.face_b) {
            g.alive = false;
            ++killed;
        }
    }
    return killed;
}

int trim_face_gaps(Ctx& ctx, int face, const Line& keep) {
    int dropped = 0;
    for (auto& g : ctx.fl.gaps) {
        if (!g.alive) continue;
        bool on_a = g.face_a == face, on_b = g.face_b == face;
        if (!on_a && !on_b) continue;
        if (!trim_gap_to(g, on_a, keep) || g.length() < ctx.p.min_edge) {
            g.alive = false;
            ++dropped;
        }
    }
    return dropped;
}

void split_steep(Ctx& ctx, int ia, int ib, const Classification& c, double area);

void absorb(Ctx& ctx, int ia, int ib, const Classification& c, double area) {
    FlatLayout& fl = ctx.fl;
    int keeper = ia, other = ib;
    if (std::abs(polygon_area(fl.faces[ib].poly)) > std::abs(polygon_area(fl.faces[ia].poly)))
        std::swap(keeper, other);
    double tol = std::max(0.1, 4.0 * ctx.p.coincidence_tol);
    if (!absorbable(fl.faces[other].poly, fl.faces[keeper].poly, tol)) {
        split_steep(ctx, ia, ib, c, area);  // stacked but not containable: separate instead
        return;
    }
    LayoutFace& k = fl.faces[keeper];
    LayoutFace& o = fl.faces[other];
    k.sources.insert(k.sources.end(), o.sources.begin(), o.sources.end());
    o.alive = false;
    int killed = retarget_gaps(fl, other, keeper);
    ResolutionEvent ev;
    ev.round = ctx.round;
    ev.cls = OverlapClass::full_overlap;
    ev.face_a = ia;
    ev.face_b = ib;
    ev.area = area;
    ev.action = "absorbed";
    ev.trimmed_area = std::abs(polygon_area(o.poly)) - area;  // part outside the keeper
    if (ev.trimmed_area < 0) ev.trimmed_area = 0;
    ev.dropped_gaps = killed;
    ctx.log.push_back(ev);
}

void merge_shallow(Ctx& ctx, int ia, int ib, const Classification& c, double area) {
    FlatLayout& fl = ctx.fl;
    int keeper = ia, other = ib;
    int kedge = c.edge_a;
    if (std::abs(polygon_area(fl.faces[ib].poly)) > std::abs(polygon_area(fl.faces[ia].poly))) {
        keeper = ib;
        other = ia;
        kedge = c.edge_b;
    }
    LayoutFace& k = fl.faces[keeper];
    LayoutFace& o = fl.faces[other];
    const Poly& kp = k.poly;
    Vec2 q0 = kp[kedge], q1 = kp[(kedge + 1) % kp.size()];
    Vec2 t = (q1 - q0).normalized();
    Vec2 inward = t.perp();  // CCW keeper: interior is left of the edge
    // keep the side of the other face away from the keeper's interior, with a
    // hair of overlap left so the union is a single well-formed ring
    Line clip{q0 + inward * 1e-6, -t};
    auto pieces = split_polygon(o.poly, clip, 1e-9);
    if (pieces.empty()) {  // nothing survives: fully swallowed by the keeper
        absorb(ctx, ia, ib, c, area);
        return;
    }
    size_t big = 0;
    for (size_t i = 1; i < pieces.size(); ++i)
        if (polygon_area(pieces[i]) > polygon_area(pieces[big])) big = i;
    for (size_t i = 0; i < pieces.size(); ++i)
        if (i != big) fl.shavings.push_back(pieces[i]);

    double a0 = std::abs(polygon_area(k.poly)) + std::abs(polygon_area(o.poly));
    Poly merged = dedupe_polygon(union_overlapping(k.poly, pieces[big]));
    int dropped = trim_face_gaps(ctx, other, clip);
    k.poly = merged;
    k.clipped = true;
    k.sources.insert(k.sources.end(), o.sources.begin(), o.sources.end());
    o.alive = false;
    int killed = retarget_gaps(fl, other, keeper);

    ResolutionEvent ev;
    ev.round = ctx.round;
    ev.cls = OverlapClass::shallow_partial;
    ev.face_a = ia;
    ev.face_b = ib;
    ev.area = area;
    ev.action = "merged";
    ev.trimmed_area = std::max(0.0, a0 - std::abs(polygon_area(merged)));
    ev.dropped_gaps = dropped + killed;
    ctx.log.push_back(ev);
}

void split_steep(Ctx& ctx, int ia, int ib, const Classification& c, double area) {
    FlatLayout& fl = ctx.fl;
    LayoutFace& A = fl.faces[ia];
    LayoutFace& B = fl.faces[ib];
    double areaA = std::abs(polygon_area(A.poly)), areaB = std::abs(polygon_area(B.poly));

    Vec2 X = c.crossing;
    Vec2 bhat;
    if (c.edge_a >= 0 && c.edge_b >= 0) {
        Vec2 d1 = (A.poly[(c.edge_a + 1) % A.poly.size()] - A.poly[c.edge_a]).normalized();
        Vec2 d2 = (B.poly[(c.edge_b + 1) % B.poly.size()] - B.poly[c.edge_b]).normalized();
        if (dot(d1, d2) < 0) d2 = -d2;
        bhat = (d1 + d2).normalized();
    } else {  // no crossing pair (containment fallback): separate across centroids
        Vec2 ca = polygon_centroid(A.poly), cb = polygon_centroid(B.poly);
        X = lerp(ca, cb, 0.5);
        Vec2 axis = (cb - ca).normalized();
        if (axis.norm() < 0.5) axis = {1, 0};
        bhat = axis.perp();
    }
    Vec2 nh = bhat.perp();
    double half = 0.5 * ctx.p.gap_min_mm;

    Line center{X, bhat};
    int sideA = left_area(A.poly, center) * 2 >= areaA ? +1 : -1;
    int sideB = left_area(B.poly, center) * 2 >= areaB ? +1 : -1;
    if (sideA == sideB) {
        if (areaA >= areaB)
            sideB = -sideA;
        else
            sideA = -sideB;
    }

    auto clip_line = [&](int side) {
        return side > 0 ? Line{X + nh * half, bhat} : Line{X - nh * half, -bhat};
    };
    auto apply = [&](LayoutFace& f, int side) -> bool {
        Line ln = clip_line(side);
        auto pieces = split_polygon(f.poly, ln, 1e-9);
        if (pieces.empty()) return false;
        for (Poly& off : split_polygon(f.poly, Line{ln.p, -ln.d}, 1e-9))
            fl.shavings.push_back(std::move(off));  // contested fabric, cut away
        size_t big = 0;
        for (size_t i = 1; i < pieces.size(); ++i)
            if (polygon_area(pieces[i]) > polygon_area(pieces[big])) big = i;
        for (size_t i = 0; i < pieces.size(); ++i)
            if (i != big) fl.shavings.push_back(pieces[i]);
        f.poly = dedupe_polygon(pieces[big]);
        f.clipped = true;
        return true;
    };

    ResolutionEvent ev;
    ev.round = ctx.round;
    ev.cls = OverlapClass::steep_partial;
    ev.face_a = ia;
    ev.face_b = ib;
    ev.area = area;
    ev.action = "split";

    bool okA = apply(A, sideA), okB = apply(B, sideB);
    if (!okA || !okB) {
        // one face lives entirely inside the forbidden strip: absorb it
        LayoutFace& dead = okA ? B : A;
        LayoutFace& keep = okA ? A : B;
        keep.sources.insert(keep.sources.end(), dead.sources.begin(), dead.sources.end());
        dead.alive = false;
        ev.action = "absorbed";
        ev.dropped_gaps = retarget_gaps(fl, dead.id, keep.id);
        ctx.log.push_back(ev);
        return;
    }
    ev.dropped_gaps += trim_face_gaps(ctx, ia, clip_line(sideA));
    ev.dropped_gaps += trim_face_gaps(ctx, ib, clip_line(sideB));

    // a fresh hinge across the strip, where both new chords face each other
    double a0, a1, b0, b1;
    Line measureA{X + nh * half, bhat}, measureB{X - nh * half, bhat};
    const LayoutFace& plusF = sideA > 0 ? A : B;
    const LayoutFace& minusF = sideA > 0 ? B : A;
    if (longest_chord(plusF.poly, measureA, &a0, &a1) && longest_chord(minusF.poly, measureB, &b0, &b1)) {
        double t0 = std::max(a0, b0), t1 = std::min(a1, b1);
        if (t1 - t0 >= ctx.p.min_edge) {
            EdgeGap g;
            g.id = (int)fl.gaps.size();
            g.face_a = plusF.id;
            g.face_b = minusF.id;
            g.a_u = X + nh * half + bhat * t0;
            g.a_v = X + nh * half + bhat * t1;
            g.b_u = X - nh * half + bhat * t0;
            g.b_v = X - nh * half + bhat * t1;
            g.inserted = true;
            g.gap_lo = ctx.p.gap_min_mm;
            g.gap_hi = 1e9;
            fl.gaps.push_back(g);
            ev.inserted_gap = g.id;
        }
    }
    ctx.log.push_back(ev);
}

std::string diagnose(const FlatLayout& fl, int rounds) {
    char buf[256];
    // locate the interior vertex with the worst curvature concentration
    int worst = -1;
    double worst_defect = 0;
    if (!fl.mesh.verts.empty() && !fl.mesh.faces.empty()) {
        std::vector<double> angle_sum(fl.mesh.verts.size(), 0.0);
        std::vector<char> boundary(fl.mesh.verts.size(), 0);
        EdgeFaceMap emap = build_edge_map(fl.mesh);
        for (const auto& [k, fs] : emap)
            if (fs.size() == 1) boundary[k.a] = boundary[k.b] = 1;
        for (const auto& f : fl.mesh.faces) {
            for (int k = 0; k < 3; ++k) {
                Vec3 a = fl.mesh.verts[f[k]], b = fl.mesh.verts[f[(k + 1) % 3]],
                     c = fl.mesh.verts[f[(k + 2) % 3]];
                Vec3 u = b - a, v = c - a;
                double cosang = dot(u, v) / std::max(1e-30, u.norm() * v.norm());
                angle_sum[f[k]] += std::acos(std::clamp(cosang, -1.0, 1.0));
            }
        }
        for (size_t i = 0; i < fl.mesh.verts.size(); ++i) {
            if (boundary[i]) continue;
            double defect = 2 * M_PI - angle_sum[i];
            if (std::abs(defect) > std::abs(worst_defect)) {
                worst_defect = defect;
                worst = (int)i;
            }
        }
    }
    if (worst >= 0)
        std::snprintf(buf, sizeof buf,
                      "overlaps could not be untangled after %d rounds; worst curvature "
                      "concentration around vertex %d (angle defect %.3f rad)",
                      rounds, worst, worst_defect);
    else
        std::snprintf(buf, sizeof buf, "overlaps could not be untangled after %d rounds", rounds);
    return buf;
}

}  // namespace

Classification classify_overlap(const Poly& a, const Poly& b, const Params& p) {
    Classification out;
    const size_t na = a.size(), nb = b.size();
    for (size_t i = 0; i < na; ++i)
        for (size_t j = 0; j < nb; ++j) {
            double h = segment_hausdorff(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]);
            if (h <= p.coincidence_tol) {
                out.cls = OverlapClass::full_overlap;
                out.angle_deg = 90;
                out.edge_a = (int)i;
                out.edge_b = (int)j;
                out.crossing = lerp(a[i], a[(i + 1) % na], 0.5);
                return out;
            }
        }
    double best = 1e9;
    Vec2 sum{0, 0};
    int hits = 0;
    for (size_t i = 0; i < na; ++i) {
        for (size_t j = 0; j < nb; ++j) {
            Vec2 a0 = a[i], a1 = a[(i + 1) % na], b0 = b[j], b1 = b[(j + 1) % nb];
            auto hit = segment_intersect(a0, a1, b0, b1);
            if (!hit) continue;
            const double eps = 1e-7;
            if (hit->t < eps || hit->t > 1 - eps || hit->u < eps || hit->u > 1 - eps) continue;
            sum += hit->point;
            ++hits;
            double ang = seg_angle_deg(a1 - a0, b1 - b0);
            if (ang < best) {
                best = ang;
                out.edge_a = (int)i;
                out.edge_b = (int)j;
            }
        }
    }
    if (best < 1e9) {
        // anchor at the centre of the boundary crossings, so a separating
        // strip runs through the middle of the overlap rather than grazing
        // its corner
        out.crossing = sum * (1.0 / hits);
        out.angle_deg = best;
        out.cls = best < p.angle_threshold ? OverlapClass::shallow_partial : OverlapClass::steep_partial;
        return out;
    }
    // no boundary interaction: containment (or a numeric corner case; both
    // are handled by the absorb/centroid-split paths)
    out.cls = OverlapClass::full_overlap;
    out.angle_deg = 90;
    out.containment = true;
    return out;
}

std::string to_jsonl(const std::vector<ResolutionEvent>& log) {
    std::string out;
    char buf[320];
    for (const auto& e : log) {
        const char* cls = e.cls == OverlapClass::full_overlap      ? "full_overlap"
                          : e.cls == OverlapClass::shallow_partial ? "shallow_partial"
                                                                   : "steep_partial";
        std::snprintf(buf, sizeof buf,
                      "{\"round\":%d,\"class\":\"%s\",\"faces\":[%d,%d],\"area\":%.6f,"
                      "\"action\":\"%s\",\"trimmed_area\":%.6f,\"dropped_gaps\":%d,"
                      "\"inserted_gap\":%d}\n",
                      e.round, cls, e.face_a, e.face_b, e.area, e.action.c_str(), e.trimmed_area,
                      e.dropped_gaps, e.inserted_gap);
        out += buf;
    }
    return out;
}

std::vector<ResolutionEvent> resolve_all(FlatLayout& fl, const Params& p) {
    std::vector<ResolutionEvent> log;
    Ctx ctx{fl, p, log, 0};
    int round = 1;
    for (; round <= p.max_rounds; ++round) {
        auto rep = overlap_report(fl, true);
        if (rep.empty()) return log;
        std::vector<const OverlapEntry*> pairs;
        for (const auto& r : rep)
            if (r.kind == OverlapEntry::face_face) pairs.push_back(&r);
        if (pairs.empty()) break;  // only band defects remain: nothing to merge or split
        std::sort(pairs.begin(), pairs.end(), [](const OverlapEntry* x, const OverlapEntry* y) {
            if (x->area != y->area) return x->area > y->area;
            if (x->a != y->a) return x->a < y->a;
            return x->b < y->b;
        });
        ctx.round = round;
        std::set<int> touched;
        for (const OverlapEntry* e : pairs) {
            if (touched.count(e->a) || touched.count(e->b)) continue;
            touched.insert(e->a);
            touched.insert(e->b);
            Classification c = classify_overlap(fl.faces[e->a].poly, fl.faces[e->b].poly, p);
            switch (c.cls) {
                case OverlapClass::full_overlap: absorb(ctx, e->a, e->b, c, e->area); break;
                case OverlapClass::shallow_partial: merge_shallow(ctx, e->a, e->b, c, e->area); break;
                case OverlapClass::steep_partial: split_steep(ctx, e->a, e->b, c, e->area); break;
            }
        }
    }
    if (overlap_report(fl, true).empty()) return log;
    throw Error(ErrClass::unresolvable, "UnresolvableIntersections", diagnose(fl, round - 1));
}

}  // namespace stitchfold
