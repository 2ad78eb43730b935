#include "stitchfold/flatten.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "stitchfold/errors.hpp"

namespace stitchfold {

// ---------------------------------------------------------------- EdgeGap

Vec2 EdgeGap::ehat() const {
    Vec2 s = dir_a() + dir_b();
    double n = s.norm();
    return n < 1e-12 ? Vec2{1, 0} : s / n;
}

Vec2 EdgeGap::nhat() const {
    Vec2 e = ehat();
    return {e.y, -e.x};  // rightward of u->v, i.e. out of face_a toward face_b
}

double EdgeGap::separation() const { return dot(mid_b() - mid_a(), nhat()); }
double EdgeGap::glide() const { return dot(mid_b() - mid_a(), ehat()); }

double EdgeGap::angle_mismatch() const {
    Vec2 da = dir_a(), db = dir_b();
    return std::atan2(cross(da, db), dot(da, db));
}

Line EdgeGap::midline() const {
    Vec2 p = (a_u + b_u) * 0.5, q = (a_v + b_v) * 0.5;
    Vec2 d = q - p;
    double n = d.norm();
    return {p, n < 1e-12 ? Vec2{1, 0} : d / n};
}

Poly EdgeGap::band() const {
    Poly q{a_u, a_v, b_v, b_u};
    if (polygon_area(q) < 0) std::reverse(q.begin(), q.end());
    return q;
}

// ---------------------------------------------------------- WorkingLayout

Poly WorkingLayout::face_poly(int f) const {
    FacePlacement pl = placement(f);
    Poly out;
    out.reserve(intrinsic[f].size());
    for (const Vec2& xi : intrinsic[f]) out.push_back(pl.apply(xi));
    return out;
}

// ---------------------------------------------------------------- unfold

std::vector<Poly> unfold_faces(const TriangleMesh& mesh) {
    std::vector<Poly> out;
    out.reserve(mesh.faces.size());
    for (const auto& f : mesh.faces) {
        const Vec3 &A = mesh.verts[f[0]], &B = mesh.verts[f[1]], &C = mesh.verts[f[2]];
        double c = dist(A, B), b = dist(A, C), a = dist(B, C);
        double x = (c * c + b * b - a * a) / (2.0 * c);
        double y2 = b * b - x * x;
        double y = y2 > 0 ? std::sqrt(y2) : 0.0;
        out.push_back({{0, 0}, {c, 0}, {x, y}});
    }
    return out;
}

// ------------------------------------------------------------- edge list

static std::vector<WorkingLayout::IEdge> build_interior_edges(const TriangleMesh& mesh) {
    EdgeFaceMap emap = build_edge_map(mesh);
    std::vector<WorkingLayout::IEdge> out;
    auto corner_of = [&](int f, int vert) {
        for (int k = 0; k < 3; ++k)
            if (mesh.faces[f][k] == vert) return k;
        return -1;
    };
    for (const auto& [key, fs] : emap) {
        if (fs.size() != 2) continue;
        // orient so fa is the face whose winding runs u->v
        int u = key.a, v = key.b;
        int fa = -1, fb = -1;
        for (int f : fs) {
            for (int k = 0; k < 3; ++k) {
                if (mesh.faces[f][k] == u && mesh.faces[f][(k + 1) % 3] == v) fa = f;
                if (mesh.faces[f][k] == v && mesh.faces[f][(k + 1) % 3] == u) fb = f;
            }
        }
        if (fa < 0 || fb < 0)
            throw validation_error("NonManifoldEdge", "edge " + std::to_string(u) + "-" +
                                                          std::to_string(v) +
                                                          " is not consistently oriented");
        WorkingLayout::IEdge e;
        e.u = u;
        e.v = v;
        e.fa = fa;
        e.fb = fb;
        e.ua = corner_of(fa, u);
        e.va = corner_of(fa, v);
        e.ub = corner_of(fb, u);
        e.vb = corner_of(fb, v);
        out.push_back(e);
    }
    return out;
}

// ------------------------------------------------------------------ init

WorkingLayout initialize_layout(const TriangleMesh& mesh, const Params& p) {
    const int F = (int)mesh.faces.size();
    if (F == 0) throw validation_error("EmptyMesh", "mesh has no faces");

    WorkingLayout L;
    L.mesh = mesh;
    L.intrinsic = unfold_faces(mesh);
    L.edges = build_interior_edges(mesh);
    L.delta.assign(F, 0.0);
    L.trans.assign(F, Vec2{0, 0});
    L.parent.assign(F, -1);
    L.theta = 0;
    L.root = (int)(p.seed % (unsigned)F);

    // face -> incident interior edge indices
    std::vector<std::vector<int>> fedges(F);
    for (int i = 0; i < (int)L.edges.size(); ++i) {
        fedges[L.edges[i].fa].push_back(i);
        fedges[L.edges[i].fb].push_back(i);
    }

    // BFS over the dual graph; children chained so shared-edge images stay
    // parallel, then pushed apart by g0 along the parent's outward normal.
    std::vector<char> seen(F, 0);
    std::deque<int> q{L.root};
    seen[L.root] = 1;
    double g0 = p.g0_mm;
    while (!q.empty()) {
        int f = q.front();
        q.pop_front();
        for (int ei : fedges[f]) {
            WorkingLayout::IEdge& e = L.edges[ei];
            int g = e.fa == f ? e.fb : e.fa;
            if (seen[g]) continue;
            seen[g] = 1;
            e.tree = true;
            L.parent[g] = f;

            bool f_is_a = (e.fa == f);
            Vec2 xf_u = L.intrinsic[f][f_is_a ? e.ua : e.ub];
            Vec2 xf_v = L.intrinsic[f][f_is_a ? e.va : e.vb];
            Vec2 xg_u = L.intrinsic[g][f_is_a ? e.ub : e.ua];
            Vec2 xg_v = L.intrinsic[g][f_is_a ? e.vb : e.va];

            Vec2 df = xf_v - xf_u, dg = xg_v - xg_u;
            L.delta[g] = L.delta[f] + std::atan2(df.y, df.x) - std::atan2(dg.y, dg.x);

            // outward normal from f across this edge, in the current layout
            Vec2 dir = rotate(df, L.delta[f]);
            Vec2 n = Vec2{dir.y, -dir.x} / dir.norm();
            if (!f_is_a) n = n * -1.0;  // winding in f runs v->u, flip outward side

            Vec2 target = rotate(xf_u, L.delta[f]) + L.trans[f] + n * g0;
            L.trans[g] = target - rotate(xg_u, L.delta[g]);
            q.push_back(g);
        }
    }
    for (int f = 0; f < F; ++f)
        if (!seen[f])
            throw validation_error("DisconnectedMesh",
                                   "face " + std::to_string(f) + " unreachable from face " +
                                       std::to_string(L.root));

    // Scale translations outward around their mean until no faces overlap.
    auto any_overlap = [&]() {
        std::vector<Poly> polys(F);
        std::vector<BBox> boxes(F);
        for (int f = 0; f < F; ++f) {
            polys[f] = L.face_poly(f);
            boxes[f] = polygon_bbox(polys[f]);
        }
        for (int i = 0; i < F; ++i)
            for (int j = i + 1; j < F; ++j) {
                if (!boxes[i].overlaps(boxes[j])) continue;
                if (intersection_area(polys[i], polys[j]) > 1e-9) return true;
            }
        return false;
    };
    for (int round = 0; round < 300 && any_overlap(); ++round) {
        Vec2 c{0, 0};
        for (const Vec2& t : L.trans) c = c + t;
        c = c / (double)F;
        for (Vec2& t : L.trans) t = c + (t - c) * 1.2;
        if (round == 200) {  // pathological coincident translations: nudge apart
            for (int f = 0; f < F; ++f)
                L.trans[f] = L.trans[f] + Vec2{0.01 * std::cos((double)f), 0.01 * std::sin((double)f)};
        }
    }

    for (auto& e : L.edges) {
        e.gap_lo = p.gap_min_mm;
        e.gap_hi = p.gap_max_mm > 0 ? p.gap_max_mm : 1e9;
    }
    return L;
}

void set_gap_caps(WorkingLayout& layout, const std::vector<double>& hi) {
    if (hi.size() != layout.edges.size())
        throw validation_error("InternalError", "gap cap count mismatch");
    for (size_t i = 0; i < hi.size(); ++i) layout.edges[i].gap_hi = hi[i];
}

// ---------------------------------------------------------------- energy

EnergyTerms eval_energy(const WorkingLayout& L, EnergyGrad* grad, unsigned mask) {
    const int F = (int)L.mesh.faces.size();
    EnergyTerms E;
    if (grad) {
        grad->d_theta = 0;
        grad->d_trans.assign(F, Vec2{0, 0});
    }

    std::vector<Poly> polys(F);
    std::vector<BBox> boxes(F);
    for (int f = 0; f < F; ++f) {
        polys[f] = L.face_poly(f);
        boxes[f] = polygon_bbox(polys[f]);
    }

    if (mask & E_OVERLAP) {
        for (int i = 0; i < F; ++i) {
            for (int j = i + 1; j < F; ++j) {
                if (!boxes[i].overlaps(boxes[j])) continue;
                OverlapGrad og = triangle_overlap_grad(polys[i], polys[j], L.trans[i], L.trans[j]);
                if (og.area <= 0) continue;
                E.overlap += og.area * og.area;
                if (grad) {
                    grad->d_trans[i] = grad->d_trans[i] + og.d_ta * (2.0 * og.area);
                    grad->d_trans[j] = grad->d_trans[j] + og.d_tb * (2.0 * og.area);
                    grad->d_theta += 2.0 * og.area * (og.d_rot_a + og.d_rot_b);
                }
            }
        }
    }

    if (mask & (E_GAP | E_GLIDE)) {
        for (const auto& e : L.edges) {
            Vec2 au = L.place(e.fa, L.intrinsic[e.fa][e.ua]);
            Vec2 av = L.place(e.fa, L.intrinsic[e.fa][e.va]);
            Vec2 bu = L.place(e.fb, L.intrinsic[e.fb][e.ub]);
            Vec2 bv = L.place(e.fb, L.intrinsic[e.fb][e.vb]);
            Vec2 da = av - au, db = bv - bu;
            Vec2 S = da + db;
            double Sn = S.norm();
            if (Sn < 1e-12) continue;
            Vec2 eh = S / Sn;
            Vec2 nh{eh.y, -eh.x};
            Vec2 mida = (au + av) * 0.5, midb = (bu + bv) * 0.5;
            Vec2 d = midb - mida;

            // wedge angle is fixed by the rotation chaining; report only
            double ang = std::atan2(cross(da, db), dot(da, db));
            E.angle += ang * ang;

            // d(d)/dtheta: both midpoints swing about their own translation
            Vec2 dd_dth = (midb - L.trans[e.fb]).perp() - (mida - L.trans[e.fa]).perp();

            if (mask & E_GAP) {
                double s = dot(d, nh);
                double pen = 0, dpen_ds = 0;
                if (s < e.gap_lo) {
                    pen = e.gap_lo - s;
                    dpen_ds = -1;
                } else if (s > e.gap_hi) {
                    pen = s - e.gap_hi;
                    dpen_ds = 1;
                }
                if (pen > 0) {
                    E.gap += pen * pen;
                    if (grad) {
                        double c = 2.0 * pen * dpen_ds;
                        grad->d_trans[e.fa] = grad->d_trans[e.fa] + nh * (-c);
                        grad->d_trans[e.fb] = grad->d_trans[e.fb] + nh * c;
                        grad->d_theta += c * (dot(dd_dth, nh) + dot(d, nh.perp()));
                    }
                }
            }

            if (mask & E_GLIDE) {
                double tau = dot(d, eh);
                E.glide += tau * tau;
                if (grad) {
                    double c = 2.0 * tau;
                    grad->d_trans[e.fa] = grad->d_trans[e.fa] + eh * (-c);
                    grad->d_trans[e.fb] = grad->d_trans[e.fb] + eh * c;
                    grad->d_theta += c * (dot(dd_dth, eh) + dot(d, eh.perp()));
                }
            }
        }
    }
    return E;
}

// -------------------------------------------------------------- optimize

EnergyBreakdown optimize(WorkingLayout& L, const Params& p) {
    const int F = (int)L.mesh.faces.size();
    EnergyGrad g;
    EnergyTerms terms = eval_energy(L, &g);
    double E = terms.objective();

    double alpha = 1.0;
    int stall = 0, iter = 0;
    bool converged = false;

    double theta0 = L.theta;
    std::vector<Vec2> trans0 = L.trans;

    for (; iter < p.max_iter; ++iter) {
        double gn2 = g.d_theta * g.d_theta;
        for (const Vec2& v : g.d_trans) gn2 += dot(v, v);
        if (gn2 < 1e-24 || E == 0.0) {
            converged = true;
            break;
        }

        theta0 = L.theta;
        trans0 = L.trans;
        double a = std::min(alpha * 2.0, 1.0);
        double Enew = E;
        bool moved = false;
        for (int h = 0; h < 60; ++h) {
            L.theta = theta0 - a * g.d_theta;
            for (int f = 0; f < F; ++f) L.trans[f] = trans0[f] - a * g.d_trans[f];
            double Et = eval_energy(L, nullptr).objective();
            if (Et <= E - 1e-4 * a * gn2) {
                Enew = Et;
                moved = true;
                break;
            }
            a *= 0.5;
        }

        double rel;
        if (moved) {
            alpha = a;
            rel = (E - Enew) / std::max(E, 1e-300);
            E = Enew;
            terms = eval_energy(L, &g);
        } else {
            L.theta = theta0;
            L.trans = trans0;
            rel = 0.0;
        }
        if (rel < 1e-8)
            ++stall;
        else
            stall = 0;
        if (stall >= 20) {
            converged = true;
            ++iter;
            break;
        }
    }

    EnergyBreakdown out;
    out.overlap_term = terms.overlap;
    out.gap_range_term = terms.gap;
    out.glide_part = terms.glide;
    out.angle_part = terms.angle;
    out.parallelism_residual = terms.glide + terms.angle;
    out.total = terms.objective() + terms.angle;
    out.iterations = iter;
    out.converged = converged;
    return out;
}

// -------------------------------------------------------------- snapshot

FlatLayout snapshot(const WorkingLayout& L) {
    FlatLayout fl;
    fl.mesh = L.mesh;
    fl.intrinsic = L.intrinsic;
    const int F = (int)L.mesh.faces.size();
    fl.faces.reserve(F);
    for (int f = 0; f < F; ++f) {
        LayoutFace lf;
        lf.id = f;
        lf.poly = L.face_poly(f);
        lf.sources = {{f, L.placement(f)}};
        fl.faces.push_back(std::move(lf));
    }
    fl.gaps.reserve(L.edges.size());
    for (int i = 0; i < (int)L.edges.size(); ++i) {
        const auto& e = L.edges[i];
        EdgeGap gp;
        gp.id = i;
        gp.face_a = e.fa;
        gp.face_b = e.fb;
        gp.mesh_u = e.u;
        gp.mesh_v = e.v;
        gp.a_u = L.place(e.fa, L.intrinsic[e.fa][e.ua]);
        gp.a_v = L.place(e.fa, L.intrinsic[e.fa][e.va]);
        gp.b_u = L.place(e.fb, L.intrinsic[e.fb][e.ub]);
        gp.b_v = L.place(e.fb, L.intrinsic[e.fb][e.vb]);
        gp.tree = e.tree;
        gp.gap_lo = e.gap_lo;
        gp.gap_hi = e.gap_hi;
        fl.gaps.push_back(gp);
    }
    return fl;
}

// -------------------------------------------------------- overlap report

std::vector<OverlapEntry> overlap_report(const FlatLayout& fl, bool include_bands) {
    constexpr double kAreaGate = 1e-6;  // mm^2; anything below is clip noise
    std::vector<OverlapEntry> out;

    std::vector<int> fidx;
    for (int i = 0; i < (int)fl.faces.size(); ++i)
        if (fl.faces[i].alive) fidx.push_back(i);
    std::vector<BBox> fbox(fl.faces.size());
    for (int i : fidx) fbox[i] = polygon_bbox(fl.faces[i].poly);

    for (size_t x = 0; x < fidx.size(); ++x) {
        for (size_t y = x + 1; y < fidx.size(); ++y) {
            int i = fidx[x], j = fidx[y];
            if (!fbox[i].overlaps(fbox[j])) continue;
            double a = intersection_area(fl.faces[i].poly, fl.faces[j].poly);
            if (a > kAreaGate) out.push_back({OverlapEntry::face_face, i, j, a});
        }
    }
    if (include_bands) {
        std::vector<int> gidx;
        for (int i = 0; i < (int)fl.gaps.size(); ++i)
            if (fl.gaps[i].alive) gidx.push_back(i);
        std::vector<Poly> bands(fl.gaps.size());
        std::vector<BBox> gbox(fl.gaps.size());
        for (int i : gidx) {
            bands[i] = fl.gaps[i].band();
            gbox[i] = polygon_bbox(bands[i]);
        }
        for (int gi : gidx) {
            if (polygon_area(bands[gi]) < kAreaGate) continue;
            for (int fi : fidx) {
                if (!gbox[gi].overlaps(fbox[fi])) continue;
                double a = intersection_area(bands[gi], fl.faces[fi].poly);
                if (a > kAreaGate) out.push_back({OverlapEntry::face_band, fi, gi, a});
            }
        }
        for (size_t x = 0; x < gidx.size(); ++x) {
            for (size_t y = x + 1; y < gidx.size(); ++y) {
                int i = gidx[x], j = gidx[y];
                if (polygon_area(bands[i]) < kAreaGate || polygon_area(bands[j]) < kAreaGate) continue;
                if (!gbox[i].overlaps(gbox[j])) continue;
                double a = intersection_area(bands[i], bands[j]);
                if (a > kAreaGate) out.push_back({OverlapEntry::band_band, i, j, a});
            }
        }
    }
    return out;
}

}  // namespace stitchfold
