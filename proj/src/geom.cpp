#include "stitchfold/geom.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace stitchfold {

namespace {
constexpr double kOnLineEps = 1e-9;
}

double polygon_area(const Poly& p) {
    double a = 0.0;
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) a += cross(p[i], p[(i + 1) % n]);
    return 0.5 * a;
}

Vec2 polygon_centroid(const Poly& p) {
    double a = 0.0;
    Vec2 c{0, 0};
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i) {
        double w = cross(p[i], p[(i + 1) % n]);
        a += w;
        c += (p[i] + p[(i + 1) % n]) * w;
    }
    if (std::abs(a) < 1e-14) {
        // fall back to vertex mean for degenerate input
        Vec2 m{0, 0};
        for (auto& q : p) m += q;
        return m / double(p.size());
    }
    return c / (3.0 * a);
}

std::optional<SegHit> segment_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    Vec2 r = b - a, s = d - c;
    double denom = cross(r, s);
    if (std::abs(denom) < 1e-14) return std::nullopt;  // parallel; coincidence handled separately
    double t = cross(c - a, s) / denom;
    double u = cross(c - a, r) / denom;
    const double e = 1e-9;
    if (t < -e || t > 1 + e || u < -e || u > 1 + e) return std::nullopt;
    return SegHit{a + r * t, t, u};
}

bool polygon_is_simple(const Poly& p) {
    size_t n = p.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = p[i], b = p[(i + 1) % n];
        if (dist(a, b) < 1e-12) return false;
        for (size_t j = i + 1; j < n; ++j) {
            // skip adjacent edges, they share an endpoint by construction
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            Vec2 c = p[j], d = p[(j + 1) % n];
            auto hit = segment_intersect(a, b, c, d);
            if (hit && hit->t > 1e-9 && hit->t < 1 - 1e-9 && hit->u > 1e-9 && hit->u < 1 - 1e-9)
                return false;
        }
    }
    return true;
}

bool point_in_polygon(const Vec2& q, const Poly& p) {
    size_t n = p.size();
    bool in = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        if (point_segment_dist(q, p[j], p[i]) < 1e-9) return true;
        if ((p[i].y > q.y) != (p[j].y > q.y)) {
            double xi = p[j].x + (p[i].x - p[j].x) * (q.y - p[j].y) / (p[i].y - p[j].y);
            if (q.x < xi) in = !in;
        }
    }
    return in;
}

void BBox::add(const Vec2& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
}
void BBox::add(const BBox& b) {
    add(b.lo);
    add(b.hi);
}
bool BBox::overlaps(const BBox& o, double pad) const {
    return lo.x - pad <= o.hi.x && o.lo.x - pad <= hi.x && lo.y - pad <= o.hi.y &&
           o.lo.y - pad <= hi.y;
}

BBox polygon_bbox(const Poly& p) {
    BBox b;
    for (auto& q : p) b.add(q);
    return b;
}

double point_segment_dist(const Vec2& q, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    if (len2 < 1e-24) return dist(q, a);
    double t = std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
    return dist(q, a + ab * t);
}

double segment_segment_dist(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    if (segment_intersect(a, b, c, d)) return 0.0;
    return std::min(std::min(point_segment_dist(a, c, d), point_segment_dist(b, c, d)),
                    std::min(point_segment_dist(c, a, b), point_segment_dist(d, a, b)));
}

double segment_hausdorff(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    double h1 = std::max(point_segment_dist(a, c, d), point_segment_dist(b, c, d));
    double h2 = std::max(point_segment_dist(c, a, b), point_segment_dist(d, a, b));
    return std::max(h1, h2);
}

Poly clip_halfplane(const Poly& subject, const Line& ln) {
    Poly out;
    size_t n = subject.size();
    if (n == 0) return out;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& cur = subject[i];
        const Vec2& nxt = subject[(i + 1) % n];
        double dc = ln.signed_dist(cur), dn = ln.signed_dist(nxt);
        bool cin = dc >= -kOnLineEps, nin = dn >= -kOnLineEps;
        if (cin) out.push_back(cur);
        if (cin != nin) {
            double t = dc / (dc - dn);
            out.push_back(lerp(cur, nxt, t));
        }
    }
    return out;
}

Poly clip_convex(const Poly& subject, const Poly& convex_clip) {
    Poly cur = subject;
    size_t n = convex_clip.size();
    for (size_t i = 0; i < n && !cur.empty(); ++i) {
        Vec2 a = convex_clip[i], b = convex_clip[(i + 1) % n];
        cur = clip_halfplane(cur, Line{a, (b - a).normalized()});
    }
    return cur;
}

static TaggedPoly clip_halfplane_tagged(const TaggedPoly& subject, const Line& ln) {
    TaggedPoly out;
    size_t n = subject.pts.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& cur = subject.pts[i];
        const Vec2& nxt = subject.pts[(i + 1) % n];
        int tag = subject.edge_tag[i];
        double dc = ln.signed_dist(cur), dn = ln.signed_dist(nxt);
        bool cin = dc >= -kOnLineEps, nin = dn >= -kOnLineEps;
        if (cin) {
            out.pts.push_back(cur);
            out.edge_tag.push_back(tag);
        }
        if (cin != nin) {
            double t = dc / (dc - dn);
            out.pts.push_back(lerp(cur, nxt, t));
            // leaving: the next stretch runs along the clip line; entering:
            // it continues along the subject edge we were on
            out.edge_tag.push_back(cin ? CLIP_EDGE : tag);
        }
    }
    return out;
}

TaggedPoly clip_convex_tagged(const Poly& subject, const Poly& convex_clip) {
    TaggedPoly cur;
    cur.pts = subject;
    cur.edge_tag.resize(subject.size());
    for (size_t i = 0; i < subject.size(); ++i) cur.edge_tag[i] = int(i);
    size_t n = convex_clip.size();
    for (size_t i = 0; i < n && !cur.pts.empty(); ++i) {
        Vec2 a = convex_clip[i], b = convex_clip[(i + 1) % n];
        cur = clip_halfplane_tagged(cur, Line{a, (b - a).normalized()});
    }
    return cur;
}

std::vector<std::array<int, 3>> triangulate(const Poly& p) {
    std::vector<std::array<int, 3>> tris;
    size_t n = p.size();
    if (n < 3) return tris;
    std::vector<int> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = int(i);

    auto inside_tri = [&](const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& q) {
        double e = -1e-12;
        return orient(a, b, q) >= e && orient(b, c, q) >= e && orient(c, a, q) >= e;
    };

    int guard = 0;
    while (idx.size() > 3) {
        bool clipped = false;
        size_t m = idx.size();
        for (size_t i = 0; i < m; ++i) {
            int ia = idx[(i + m - 1) % m], ib = idx[i], ic = idx[(i + 1) % m];
            if (orient(p[ia], p[ib], p[ic]) <= 1e-12) continue;  // reflex or flat
            bool ear = true;
            for (size_t j = 0; j < m; ++j) {
                int iq = idx[j];
                if (iq == ia || iq == ib || iq == ic) continue;
                if (inside_tri(p[ia], p[ib], p[ic], p[iq])) {
                    ear = false;
                    break;
                }
            }
            if (ear) {
                tris.push_back({ia, ib, ic});
                idx.erase(idx.begin() + i);
                clipped = true;
                break;
            }
        }
        if (!clipped) {
            // numerically stuck (near-degenerate input): clip the widest convex corner
            size_t best = 0;
            double best_a = -1e300;
            for (size_t i = 0; i < idx.size(); ++i) {
                size_t m2 = idx.size();
                double a = orient(p[idx[(i + m2 - 1) % m2]], p[idx[i]], p[idx[(i + 1) % m2]]);
                if (a > best_a) {
                    best_a = a;
                    best = i;
                }
            }
            size_t m2 = idx.size();
            tris.push_back({idx[(best + m2 - 1) % m2], idx[best], idx[(best + 1) % m2]});
            idx.erase(idx.begin() + best);
        }
        if (++guard > 100000) throw std::runtime_error("triangulate: did not terminate");
    }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
}

double intersection_area(const Poly& a, const Poly& b) {
    if (a.size() < 3 || b.size() < 3) return 0.0;
    if (!polygon_bbox(a).overlaps(polygon_bbox(b))) return 0.0;
    auto ta = triangulate(a);
    auto tb = triangulate(b);
    double total = 0.0;
    for (auto& ia : ta) {
        Poly tri_a = {a[ia[0]], a[ia[1]], a[ia[2]]};
        BBox ba = polygon_bbox(tri_a);
        for (auto& ib : tb) {
            Poly tri_b = {b[ib[0]], b[ib[1]], b[ib[2]]};
            if (!ba.overlaps(polygon_bbox(tri_b))) continue;
            Poly c = clip_convex(tri_a, tri_b);
            if (c.size() >= 3) total += std::abs(polygon_area(c));
        }
    }
    return total;
}

static void accumulate_flux(const TaggedPoly& piece, const Vec2& anchor_a, const Vec2& anchor_b,
                            OverlapGrad& g) {
    size_t n = piece.pts.size();
    if (n < 3) return;
    g.area += std::abs(polygon_area(piece.pts));
    for (size_t i = 0; i < n; ++i) {
        Vec2 p0 = piece.pts[i], p1 = piece.pts[(i + 1) % n];
        Vec2 e = p1 - p0;
        double len = e.norm();
        if (len < 1e-14) continue;
        Vec2 n_out = Vec2{e.y, -e.x} / len;  // outward for CCW
        Vec2 mid = (p0 + p1) * 0.5;
        if (piece.edge_tag[i] == CLIP_EDGE) {
            g.d_tb += n_out * len;
            g.d_rot_b += len * dot((mid - anchor_b).perp(), n_out);
        } else {
            g.d_ta += n_out * len;
            g.d_rot_a += len * dot((mid - anchor_a).perp(), n_out);
        }
    }
}

OverlapGrad triangle_overlap_grad(const Poly& tri_a, const Poly& tri_b, const Vec2& anchor_a,
                                  const Vec2& anchor_b) {
    OverlapGrad g;
    TaggedPoly piece = clip_convex_tagged(tri_a, tri_b);
    accumulate_flux(piece, anchor_a, anchor_b, g);
    return g;
}

OverlapGrad polygon_overlap_grad(const Poly& a, const Poly& b, const Vec2& anchor_a,
                                 const Vec2& anchor_b) {
    OverlapGrad g;
    if (a.size() < 3 || b.size() < 3) return g;
    auto ta = triangulate(a);
    auto tb = triangulate(b);
    for (auto& ia : ta) {
        Poly tri_a = {a[ia[0]], a[ia[1]], a[ia[2]]};
        BBox bba = polygon_bbox(tri_a);
        for (auto& ib : tb) {
            Poly tri_b = {b[ib[0]], b[ib[1]], b[ib[2]]};
            if (!bba.overlaps(polygon_bbox(tri_b))) continue;
            TaggedPoly piece = clip_convex_tagged(tri_a, tri_b);
            accumulate_flux(piece, anchor_a, anchor_b, g);
        }
    }
    return g;
}

std::vector<Poly> split_polygon(const Poly& p, const Line& ln, double area_eps) {
    std::vector<Poly> out;
    size_t n = p.size();
    if (n < 3) return out;

    std::vector<double> d(n);
    bool any_in = false, any_out = false;
    for (size_t i = 0; i < n; ++i) {
        d[i] = ln.signed_dist(p[i]);
        if (std::abs(d[i]) < kOnLineEps) d[i] = 0.0;
        any_in |= d[i] > 0;
        any_out |= d[i] < 0;
    }
    if (!any_out) {
        out.push_back(p);
        return out;
    }
    if (!any_in) return out;

    // chains of boundary on the kept side, bounded by entry/exit crossings
    struct Crossing {
        Vec2 pt;
        double s;       // parameter along the line
        int chain;      // chain it belongs to
        bool is_entry;  // boundary enters kept side here
        int rank = 0;
    };
    std::vector<Poly> chains;
    std::vector<Crossing> crossings;

    // rotate start to a strictly-outside vertex so chains don't wrap
    size_t start = 0;
    while (d[start] >= 0) ++start;

    Poly cur_chain;
    int cur_idx = -1;
    for (size_t k = 0; k <= n; ++k) {
        size_t i = (start + k) % n;
        size_t j = (start + k + 1) % n;
        if (k < n && d[i] >= 0) {
            if (cur_idx < 0) {
                // entered exactly at a vertex on the line
                chains.emplace_back();
                cur_idx = int(chains.size()) - 1;
                crossings.push_back({p[i], dot(ln.d, p[i] - ln.p), cur_idx, true});
            }
            chains[cur_idx].push_back(p[i]);
        }
        if (k == n) break;
        double di = d[i], dj = d[j];
        if (di < 0 && dj > 0) {
            Vec2 x = lerp(p[i], p[j], di / (di - dj));
            chains.emplace_back();
            cur_idx = int(chains.size()) - 1;
            crossings.push_back({x, dot(ln.d, x - ln.p), cur_idx, true});
            chains[cur_idx].push_back(x);
        } else if (di > 0 && dj < 0) {
            Vec2 x = lerp(p[i], p[j], di / (di - dj));
            chains[cur_idx].push_back(x);
            crossings.push_back({x, dot(ln.d, x - ln.p), cur_idx, false});
            cur_idx = -1;
        } else if (di == 0 && dj < 0 && cur_idx >= 0) {
            crossings.push_back({p[i], dot(ln.d, p[i] - ln.p), cur_idx, false});
            cur_idx = -1;
        }
    }

    std::vector<int> order(crossings.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return crossings[a].s < crossings[b].s; });
    std::vector<int> pair_of(crossings.size(), -1);
    for (size_t r = 0; r + 1 < order.size(); r += 2) {
        pair_of[order[r]] = order[r + 1];
        pair_of[order[r + 1]] = order[r];
    }

    // entry crossing index per chain, exit crossing per chain
    std::vector<int> entry_of_chain(chains.size(), -1), exit_of_chain(chains.size(), -1);
    for (size_t i = 0; i < crossings.size(); ++i) {
        if (crossings[i].is_entry)
            entry_of_chain[crossings[i].chain] = int(i);
        else
            exit_of_chain[crossings[i].chain] = int(i);
    }

    std::vector<bool> used(chains.size(), false);
    for (size_t c0 = 0; c0 < chains.size(); ++c0) {
        if (used[c0]) continue;
        Poly piece;
        int c = int(c0);
        int guard = 0;
        while (!used[c]) {
            used[c] = true;
            piece.insert(piece.end(), chains[c].begin(), chains[c].end());
            int ex = exit_of_chain[c];
            if (ex < 0 || pair_of[ex] < 0) break;  // open chain (degenerate), bail
            int en = pair_of[ex];
            c = crossings[en].chain;
            if (++guard > int(chains.size()) + 2) break;
        }
        piece = dedupe_polygon(piece);
        if (piece.size() >= 3 && std::abs(polygon_area(piece)) > area_eps) out.push_back(piece);
    }
    return out;
}

namespace bg = boost::geometry;
using BPt = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPt, false, true>;  // CCW, closed

static BPoly to_bpoly(const Poly& p) {
    BPoly bp;
    for (auto& q : p) bg::append(bp.outer(), BPt(q.x, q.y));
    bg::correct(bp);
    return bp;
}

Poly union_overlapping(const Poly& a, const Poly& b) {
    std::vector<BPoly> result;
    bg::union_(to_bpoly(a), to_bpoly(b), result);
    if (result.empty()) return {};
    size_t best = 0;
    double best_area = -1;
    for (size_t i = 0; i < result.size(); ++i) {
        double ar = std::abs(bg::area(result[i]));
        if (ar > best_area) {
            best_area = ar;
            best = i;
        }
    }
    Poly out;
    auto& ring = result[best].outer();
    for (size_t i = 0; i + 1 < ring.size(); ++i)  // last point repeats the first
        out.push_back({bg::get<0>(ring[i]), bg::get<1>(ring[i])});
    if (polygon_area(out) < 0) std::reverse(out.begin(), out.end());
    return dedupe_polygon(out);
}

Poly dedupe_polygon(const Poly& p, double eps) {
    Poly out;
    for (auto& q : p) {
        if (out.empty() || dist(out.back(), q) > eps) out.push_back(q);
    }
    while (out.size() > 1 && dist(out.front(), out.back()) <= eps) out.pop_back();
    // drop collinear spikes
    bool changed = true;
    while (changed && out.size() > 3) {
        changed = false;
        for (size_t i = 0; i < out.size(); ++i) {
            size_t n = out.size();
            const Vec2& a = out[(i + n - 1) % n];
            const Vec2& b = out[i];
            const Vec2& c = out[(i + 1) % n];
            if (std::abs(orient(a, b, c)) < eps && dot(b - a, c - b) > 0) {
                out.erase(out.begin() + i);
                changed = true;
                break;
            }
        }
    }
    return out;
}

}  // namespace stitchfold
