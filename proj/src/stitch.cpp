#include "stitchfold/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <set>

#include "stitchfold/errors.hpp"

namespace stitchfold {
namespace {

std::string msgf(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

constexpr double kArm = 0.6;           // corner arm offset along each leg
constexpr double kAmpFace = 0.6;       // zigzag throw into the face (clear of the channel rows)
constexpr double kTerminalGap = 0.75;  // stop short of a lock center
constexpr double kFoldEndClear = 0.9;  // crease setback from the thread crossings

Vec2 side_dir(const Poly& p, int i) {
    int n = (int)p.size();
    return (p[(i + 1) % n] - p[i]).normalized();
}

// Inward corner bisector; CCW winding keeps the interior on the left.
Vec2 corner_bisector(const Poly& p, int i) {
    int n = (int)p.size();
    Vec2 b = side_dir(p, (i + n - 1) % n).perp() + side_dir(p, i).perp();
    double bn = b.norm();
    return bn < 1e-9 ? side_dir(p, i).perp() : b / bn;
}

Vec2 lock_center(const Poly& p, int corner, double inset) {
    return p[corner] + corner_bisector(p, corner) * inset;
}

// Inset lines of the two sides meeting at a corner cross at the miter point,
// offset*tan(turn/2) along either side. Any line at `offset` must start far
// enough past that crossing to keep clear of the neighbor's points; the
// clearance grows as the corner sharpens and the lines cross at a shallower
// angle. Straight and reflex corners need nothing: the lines diverge.
double corner_trim(const Poly& poly, int corner, double offset) {
    int n = (int)poly.size();
    Vec2 u = side_dir(poly, (corner + n - 1) % n);
    Vec2 w = side_dir(poly, corner);
    double turn = std::atan2(cross(u, w), dot(u, w));
    if (turn <= 1e-9) return 0;
    double interior = M_PI - turn;
    double clear = std::max(0.5, 0.35 / std::max(std::sin(interior), 0.05));
    return offset * std::tan(turn / 2) + clear;
}

struct SideSpan {
    Vec2 A, t, nin;  // side origin, unit direction, inward normal
    double len = 0;
    double lo = 0, hi = 0;  // usable arc interval for the inset line
};

SideSpan side_line_span(const Poly& poly, int side, double offset, double base_trim) {
    int n = (int)poly.size();
    SideSpan s;
    s.A = poly[side];
    Vec2 B = poly[(side + 1) % n];
    s.len = dist(s.A, B);
    s.t = (B - s.A) / s.len;
    s.nin = s.t.perp();
    s.lo = std::max(base_trim, corner_trim(poly, side, offset));
    s.hi = s.len - std::max(base_trim, corner_trim(poly, (side + 1) % n, offset));
    return s;
}

Vec2 at_arc(const SideSpan& s, double arc, double offset) { return s.A + s.t * arc + s.nin * offset; }

struct SideRef {
    int side = -1;
    bool fwd = true;  // gap's u->v runs with the face winding
};

SideRef locate_side(const Poly& poly, const Vec2& p0, const Vec2& p1, int face_id, int gap_id) {
    int n = (int)poly.size();
    for (int i = 0; i < n; ++i) {
        const Vec2& A = poly[i];
        const Vec2& B = poly[(i + 1) % n];
        if (point_segment_dist(p0, A, B) < 1e-6 && point_segment_dist(p1, A, B) < 1e-6)
            return {i, dot(p1 - p0, B - A) > 0};
    }
    throw Error(ErrClass::validation, "InternalError",
                msgf("hinge %d edge image is not on the boundary of face %d", gap_id, face_id));
}

double side_len(const Poly& p, int i) { return dist(p[i], p[(i + 1) % (int)p.size()]); }

// Work accumulated per face before any run is emitted.
struct FaceWork {
    std::set<int> sides;    // sides carrying channel rows and a shrink rail
    std::set<int> corners;  // corners carrying lock clusters
    std::map<int, int> passes;  // shrink thread passes per side
};

void mark_face(FaceWork& w, const Poly& poly, int hinge_side, int type, int face_id, const Params& p) {
    int n = (int)poly.size();
    auto usable = [&](int i) { return side_len(poly, i) - 2 * p.corner_clearance_mm; };
    if (usable(hinge_side) + 1e-9 < p.min_span_mm)
        throw validation_error("SpacingInfeasible",
                               msgf("face %d side %d leaves %.2fmm of channel span, minimum is %.2fmm",
                                    face_id, hinge_side, usable(hinge_side), p.min_span_mm));
    auto add = [&](int i) {
        w.sides.insert(i);
        w.corners.insert(i);
        w.corners.insert((i + 1) % n);
    };
    add(hinge_side);
    if (type >= 2)
        for (int i = 0; i < n; ++i)
            if (usable(i) + 1e-9 >= p.min_span_mm) add(i);
    // thread passes: the run pair doubles everything
    int lap = type == 2 ? 2 : type >= 3 ? 4 : 0;
    if (lap)
        for (int i : w.sides) w.passes[i] += lap;
    if (type == 1) w.passes[hinge_side] += 2;
    if (type == 4) w.passes[hinge_side] += 2;  // the extra hinge-span pass
}

// Canonical shrink-path penetrations along one side, shared by every hinge
// routed over it so coincident passes reuse the same holes.
struct Rail {
    SideSpan span;
    std::vector<Vec2> pts;  // uniformly spaced over [lo, hi] at the inset line
    double arc(int i) const {
        int n = (int)pts.size() - 1;
        return n == 0 ? span.lo : span.lo + (span.hi - span.lo) * i / n;
    }
    int nearest(double target) const {
        int n = (int)pts.size() - 1;
        if (n == 0) return 0;
        double step = (span.hi - span.lo) / n;
        int i = (int)std::lround((target - span.lo) / step);
        return std::clamp(i, 0, n);
    }
};

using RailMap = std::map<std::pair<int, int>, Rail>;

// Shrink-path station: either a shared rail penetration or a free point.
struct Station {
    Vec2 pos;
    int face = -1, side = -1, idx = -1;  // rail identity, -1s for free points
    PointRole role = PointRole::channel;
};

bool rail_adjacent(const Station& a, const Station& b) {
    return a.face >= 0 && a.face == b.face && a.side == b.side && std::abs(a.idx - b.idx) == 1;
}

void append_station(std::vector<Station>& st, Station s) {
    if (!st.empty() && dist(st.back().pos, s.pos) < 1e-12) {
        st.back() = std::move(s);  // keep rail identity of the later twin
        return;
    }
    st.push_back(std::move(s));
}

void append_rail(std::vector<Station>& st, const RailMap& rails, int face, int side, bool forward) {
    const Rail& R = rails.at({face, side});
    int n = (int)R.pts.size();
    for (int k = 0; k < n; ++k) {
        int i = forward ? k : n - 1 - k;
        append_station(st, {R.pts[i], face, side, i});
    }
}

// One full winding-order lap entering and leaving at rail point `anchor` of
// `start_side`. Sides without a rail (too short to anchor) are hopped.
void append_lap(std::vector<Station>& st, const RailMap& rails, const FaceWork& w, int face,
                int nsides, int start_side, int anchor) {
    const Rail& R0 = rails.at({face, start_side});
    int last = (int)R0.pts.size() - 1;
    for (int i = anchor; i <= last; ++i) append_station(st, {R0.pts[i], face, start_side, i});
    for (int d = 1; d < nsides; ++d) {
        int s = (start_side + d) % nsides;
        if (w.sides.count(s)) append_rail(st, rails, face, s, true);
    }
    for (int i = 0; i <= anchor; ++i) append_station(st, {R0.pts[i], face, start_side, i});
}

// Expand stations into penetrations: consecutive rail points pass through
// unchanged (they are already at pitch), free segments get corner arms when
// there is room plus pitch subdivision between them.
std::vector<NeedlePoint> expand_path(const std::vector<Station>& st, const Params& p) {
    std::vector<NeedlePoint> out;
    if (st.empty()) return out;
    out.push_back({st[0].pos, st[0].role});
    for (size_t i = 1; i < st.size(); ++i) {
        const Station& A = st[i - 1];
        const Station& B = st[i];
        double L = dist(A.pos, B.pos);
        if (!rail_adjacent(A, B) && L > 1e-12) {
            Vec2 d = (B.pos - A.pos) / L;
            double lo = 0, hi = L;
            bool arms = L >= 2 * kArm + p.safety_margin;
            if (arms) {
                out.push_back({A.pos + d * kArm, PointRole::channel});
                lo = kArm;
                hi = L - kArm;
            }
            int n = (int)std::ceil((hi - lo) / p.straight_pitch_mm);
            for (int j = 1; j < n; ++j)
                out.push_back({A.pos + d * (lo + (hi - lo) * j / n), PointRole::channel});
            if (arms) out.push_back({A.pos + d * (L - kArm), PointRole::channel});
        }
        out.push_back({B.pos, B.role});
    }
    return out;
}

int emit(StitchProgram& prog, StitchRun r) {
    r.id = (int)prog.runs.size();
    prog.runs.push_back(std::move(r));
    return prog.runs.back().id;
}

void check_acyclic(const StitchProgram& prog) {
    std::vector<int> indeg(prog.runs.size(), 0);
    std::vector<std::vector<int>> adj(prog.runs.size());
    for (auto& [a, b] : prog.deps) {
        adj[a].push_back(b);
        ++indeg[b];
    }
    std::vector<int> q;
    for (size_t i = 0; i < indeg.size(); ++i)
        if (!indeg[i]) q.push_back((int)i);
    size_t seen = 0;
    while (!q.empty()) {
        int u = q.back();
        q.pop_back();
        ++seen;
        for (int v : adj[u])
            if (--indeg[v] == 0) q.push_back(v);
    }
    if (seen != prog.runs.size())
        throw validation_error("CyclicDependency", "stitch run dependencies contain a cycle");
}

}  // namespace

const char* to_string(PointRole r) {
    switch (r) {
        case PointRole::lock: return "lock";
        case PointRole::channel: return "channel";
        case PointRole::fold_top: return "fold_top";
        case PointRole::fold_bobbin_anchor: return "fold_bobbin_anchor";
        case PointRole::soluble_hold: return "soluble_hold";
    }
    return "?";
}

const char* to_string(ThreadRole r) {
    switch (r) {
        case ThreadRole::shrink: return "shrink";
        case ThreadRole::structural_top: return "structural_top";
        case ThreadRole::structural_bobbin: return "structural_bobbin";
        case ThreadRole::soluble_bobbin: return "soluble_bobbin";
    }
    return "?";
}

std::vector<NeedlePoint> place_needle_points(const std::vector<Vec2>& sk, double pitch,
                                             double margin, PointRole role) {
    std::vector<NeedlePoint> out;
    if (sk.empty()) return out;
    out.push_back({sk[0], role});
    int nseg = (int)sk.size() - 1;
    for (int i = 0; i < nseg; ++i) {
        Vec2 A = sk[i], B = sk[i + 1];
        double L = dist(A, B);
        bool ca = i > 0, cb = i + 1 < nseg;
        double need = (ca ? kArm : 0) + (cb ? kArm : 0) + margin;
        if (L < need)
            throw validation_error(
                "SpacingInfeasible",
                msgf("skeleton segment %d is %.2fmm long, needs %.2fmm for needle clearance", i, L, need));
        Vec2 d = (B - A) / L;
        double lo = ca ? kArm : 0, hi = L - (cb ? kArm : 0);
        if (ca) out.push_back({A + d * kArm, role});
        int n = (int)std::ceil((hi - lo) / pitch);
        for (int j = 1; j < n; ++j) out.push_back({A + d * (lo + (hi - lo) * j / n), role});
        if (cb) out.push_back({B - d * kArm, role});
        out.push_back({B, role});
    }
    for (size_t i = 1; i < out.size(); ++i) {
        double d = dist(out[i - 1].pos, out[i].pos);
        if (d < margin - 1e-9)
            throw validation_error("SpacingInfeasible",
                                   msgf("needle points %.3fmm apart, minimum spacing is %.3fmm", d, margin));
    }
    return out;
}

std::pair<StitchRun, StitchRun> fold_pair(Vec2 c0, Vec2 c1, Vec2 face_out, bool mountain,
                                          double amp_band, const Params& p) {
    StitchRun anchor, shrink;
    double len = dist(c0, c1);
    if (len < 1e-9) return {anchor, shrink};
    int n = (int)std::ceil(len / p.straight_pitch_mm);
    std::vector<NeedlePoint> pts;
    for (int i = 0; i <= n; ++i) {
        bool face_side = (i % 2) == 0;
        Vec2 pos = lerp(c0, c1, double(i) / n) + face_out * (face_side ? kAmpFace : -amp_band);
        pts.push_back({pos, face_side ? PointRole::fold_top : PointRole::fold_bobbin_anchor});
    }
    anchor.points = pts;
    shrink.points = pts;
    anchor.tag = shrink.tag = "fold";
    anchor.tension = Tension::pulled;
    shrink.tension = Tension::floating;
    shrink.thread = ThreadRole::shrink;
    // mountain creases carry the shrinking thread underneath, valleys on top
    anchor.thread = mountain ? ThreadRole::structural_top : ThreadRole::structural_bobbin;
    return {anchor, shrink};
}

StitchRun soluble_holds_for(const StitchRun& shrink, const Params& p) {
    StitchRun r;
    r.thread = ThreadRole::soluble_bobbin;
    r.tension = Tension::floating;
    r.gap = shrink.gap;
    r.tag = "hold";
    r.pair = shrink.id;
    if (shrink.points.empty()) return r;
    r.points.push_back({shrink.points[0].pos, PointRole::soluble_hold});
    double acc = 0;
    for (size_t i = 1; i < shrink.points.size(); ++i) {
        acc += dist(shrink.points[i - 1].pos, shrink.points[i].pos);
        if (acc >= p.hold_pitch_mm - 1e-6) {
            r.points.push_back({shrink.points[i].pos, PointRole::soluble_hold});
            acc = 0;
        }
    }
    const Vec2& last = shrink.points.back().pos;
    if (dist(r.points.back().pos, last) > 1e-12) r.points.push_back({last, PointRole::soluble_hold});
    return r;
}

StitchProgram assemble_program(const FlatLayout& fl, const HingeSet& hs, const Params& p) {
    std::map<int, const HingePlan*> plan_of;
    for (const auto& pl : hs.plans) plan_of[pl.gap_id] = &pl;

    // pass 1: what each face must carry
    std::map<int, FaceWork> work;
    std::map<int, std::pair<SideRef, SideRef>> gap_sides;
    for (const auto& g : fl.gaps) {
        if (!g.alive) continue;
        const HingePlan* pl = plan_of.at(g.id);
        SideRef sa = locate_side(fl.faces[g.face_a].poly, g.a_u, g.a_v, g.face_a, g.id);
        SideRef sb = locate_side(fl.faces[g.face_b].poly, g.b_u, g.b_v, g.face_b, g.id);
        gap_sides[g.id] = {sa, sb};
        mark_face(work[g.face_a], fl.faces[g.face_a].poly, sa.side, pl->type, g.face_a, p);
        mark_face(work[g.face_b], fl.faces[g.face_b].poly, sb.side, pl->type, g.face_b, p);
    }
    for (auto& [f, w] : work)
        for (auto& [side, count] : w.passes)
            if (count > 6)
                throw validation_error(
                    "ChannelConflict",
                    msgf("face %d side %d carries %d shrink thread passes, the channel fits 6", f, side, count));

    // pass 2: structural runs and the shared rails
    StitchProgram prog;
    RailMap rails;
    std::map<int, std::vector<int>> structural_of;  // face -> run ids
    for (auto& [f, w] : work) {
        const Poly& poly = fl.faces[f].poly;
        for (int c : w.corners) {
            StitchRun r;
            r.thread = ThreadRole::structural_top;
            r.tension = Tension::pulled;
            r.face = f;
            r.tag = "lock";
            Vec2 ctr = lock_center(poly, c, p.lock_inset_mm);
            Vec2 u = corner_bisector(poly, c), v = u.perp();
            for (int i = -1; i <= 1; ++i) {
                for (int k = -1; k <= 1; ++k) {
                    int j = (i % 2 == 0) ? k : -k;  // serpentine
                    r.points.push_back({ctr + u * (i * p.safety_margin) + v * (j * p.safety_margin),
                                        PointRole::lock});
                }
            }
            structural_of[f].push_back(emit(prog, std::move(r)));
        }
        for (int s : w.sides) {
            for (double off : {p.anchor_inset_mm - p.safety_margin, p.anchor_inset_mm + p.safety_margin}) {
                SideSpan sp = side_line_span(poly, s, off, p.corner_clearance_mm);
                if (sp.hi - sp.lo < p.safety_margin)
                    throw validation_error(
                        "SpacingInfeasible",
                        msgf("face %d side %d has no room for its guide channel between the corners", f, s));
                StitchRun r;
                r.thread = ThreadRole::structural_top;
                r.tension = Tension::pulled;
                r.face = f;
                r.tag = "channel";
                r.points = place_needle_points({at_arc(sp, sp.lo, off), at_arc(sp, sp.hi, off)},
                                               p.straight_pitch_mm, p.safety_margin, PointRole::channel);
                structural_of[f].push_back(emit(prog, std::move(r)));
            }
            Rail rail;
            rail.span = side_line_span(poly, s, p.anchor_inset_mm, p.corner_clearance_mm);
            if (rail.span.hi - rail.span.lo < p.safety_margin)
                throw validation_error(
                    "SpacingInfeasible",
                    msgf("face %d side %d has no room for its guide channel between the corners", f, s));
            auto mid = place_needle_points(
                {at_arc(rail.span, rail.span.lo, p.anchor_inset_mm),
                 at_arc(rail.span, rail.span.hi, p.anchor_inset_mm)},
                p.straight_pitch_mm, p.safety_margin, PointRole::channel);
            for (auto& np : mid) rail.pts.push_back(np.pos);
            rails.emplace(std::make_pair(f, s), std::move(rail));
        }
    }

    // pass 3: per-hinge work
    for (const auto& g : fl.gaps) {
        if (!g.alive) continue;
        const HingePlan* pl = plan_of.at(g.id);
        auto [sa, sb] = gap_sides.at(g.id);
        int fa = g.face_a, fb = g.face_b;
        const Poly& pa = fl.faces[fa].poly;
        const Poly& pb = fl.faces[fb].poly;
        int na = (int)pa.size(), nb = (int)pb.size();
        Vec2 nh = g.nhat();
        double s = g.separation();
        double amp_band = std::clamp(s / 2 - 1.0, 0.3, 0.6);

        // gap endpoint arcs along each hinge side, and the rail anchor indices
        const Rail& ra = rails.at({fa, sa.side});
        const Rail& rb = rails.at({fb, sb.side});
        auto arcs = [&](const Rail& R, const Vec2& u_pt, const Vec2& v_pt) {
            return std::make_pair(dot(u_pt - R.span.A, R.span.t), dot(v_pt - R.span.A, R.span.t));
        };
        auto [ga_u, ga_v] = arcs(ra, g.a_u, g.a_v);
        auto [gb_u, gb_v] = arcs(rb, g.b_u, g.b_v);
        double cc = p.corner_clearance_mm;
        int a0 = ra.nearest(ga_u + (ga_v > ga_u ? cc : -cc));
        int a1 = ra.nearest(ga_v + (ga_v > ga_u ? -cc : cc));
        int b0 = rb.nearest(gb_u + (gb_v > gb_u ? cc : -cc));
        int b1 = rb.nearest(gb_v + (gb_v > gb_u ? -cc : cc));

        // pre-creasing zigzags on both trimmed edge images (mountains)
        struct CreaseSrc {
            const Rail* R;
            double gu, gv;
            Vec2 out;
        };
        for (const CreaseSrc& cs : {CreaseSrc{&ra, ga_u, ga_v, -nh}, CreaseSrc{&rb, gb_u, gb_v, nh}}) {
            double lo = std::max(cs.R->span.lo, std::min(cs.gu, cs.gv)) + kFoldEndClear;
            double hi = std::min(cs.R->span.hi, std::max(cs.gu, cs.gv)) - kFoldEndClear;
            if (hi - lo <= 1e-9) continue;
            Vec2 c0 = cs.R->span.A + cs.R->span.t * lo;
            Vec2 c1 = cs.R->span.A + cs.R->span.t * hi;
            auto [anchor, shr] = fold_pair(c0, c1, cs.out, true, amp_band, p);
            if (anchor.points.empty()) continue;
            anchor.gap = shr.gap = g.id;
            int ia = emit(prog, std::move(anchor));
            int is = emit(prog, std::move(shr));
            prog.runs[ia].pair = is;
            prog.runs[is].pair = ia;
            prog.deps.emplace_back(ia, is);
        }

        // the shrink thread pair
        std::vector<Station> st;
        int cu_a = sa.fwd ? sa.side : (sa.side + 1) % na;
        int cu_b = sb.fwd ? sb.side : (sb.side + 1) % nb;
        int end_corner_face = fa, end_corner = cu_a;
        auto rail_pt = [&](const Rail& R, int f, int side, int idx) -> Station {
            return {R.pts[idx], f, side, idx};
        };
        if (pl->type == 1) {
            bool up = a0 <= a1;  // walk u -> v
            for (int i = a0; up ? i <= a1 : i >= a1; up ? ++i : --i)
                append_station(st, rail_pt(ra, fa, sa.side, i));
            bool vp = b1 <= b0;  // then v -> u on the far side
            for (int i = b1; vp ? i <= b0 : i >= b0; vp ? ++i : --i)
                append_station(st, rail_pt(rb, fb, sb.side, i));
            end_corner_face = fb;
            end_corner = cu_b;
        } else {
            int laps = pl->type >= 3 ? 2 : 1;
            for (int i = 0; i < laps; ++i) append_lap(st, rails, work[fa], fa, na, sa.side, a0);
            append_station(st, rail_pt(rb, fb, sb.side, b0));
            for (int i = 0; i < laps; ++i) append_lap(st, rails, work[fb], fb, nb, sb.side, b0);
            if (pl->type == 4) {
                bool up = b0 <= b1;
                for (int i = b0; up ? i <= b1 : i >= b1; up ? ++i : --i)
                    append_station(st, rail_pt(rb, fb, sb.side, i));
                bool vp = a1 <= a0;
                for (int i = a1; vp ? i <= a0 : i >= a0; vp ? ++i : --i)
                    append_station(st, rail_pt(ra, fa, sa.side, i));
                append_station(st, rail_pt(rb, fb, sb.side, b0));
                end_corner_face = fb;
                end_corner = cu_b;
            } else {
                append_station(st, rail_pt(ra, fa, sa.side, a0));
            }
        }
        Vec2 lc0 = lock_center(pa, cu_a, p.lock_inset_mm);
        Vec2 lce = lock_center(end_corner_face == fa ? pa : pb, end_corner, p.lock_inset_mm);
        Station t0{lc0 + (st.front().pos - lc0).normalized() * kTerminalGap, -1, -1, -1, PointRole::lock};
        Station t1{lce + (st.back().pos - lce).normalized() * kTerminalGap, -1, -1, -1, PointRole::lock};
        st.insert(st.begin(), t0);
        st.push_back(t1);

        StitchRun sr1;
        sr1.thread = ThreadRole::shrink;
        sr1.tension = Tension::floating;
        sr1.gap = g.id;
        sr1.tag = "shrink";
        sr1.points = expand_path(st, p);
        StitchRun sr2 = sr1;
        int i1 = emit(prog, std::move(sr1));
        int i2 = emit(prog, std::move(sr2));
        prog.runs[i1].pair = i2;
        prog.runs[i2].pair = i1;
        for (int f : {fa, fb})
            for (int sid : structural_of[f]) {
                prog.deps.emplace_back(sid, i1);
                prog.deps.emplace_back(sid, i2);
            }
        int hid = emit(prog, soluble_holds_for(prog.runs[i1], p));
        prog.deps.emplace_back(i1, hid);
        prog.deps.emplace_back(i2, hid);
    }

    check_acyclic(prog);
    return prog;
}

void check_spacing(const StitchProgram& prog, double margin) {
    // coincident coordinates are one physical penetration shared between runs;
    // quantize well below fabrication scale so repeated traversals of the same
    // path dedupe despite rounding
    std::map<std::pair<long long, long long>, int> uniq;
    std::vector<Vec2> pts;
    std::vector<int> owner;
    for (const auto& r : prog.runs)
        for (const auto& np : r.points) {
            auto key = std::make_pair((long long)std::llround(np.pos.x * 1e7),
                                      (long long)std::llround(np.pos.y * 1e7));
            if (uniq.emplace(key, (int)pts.size()).second) {
                pts.push_back(np.pos);
                owner.push_back(r.id);
            }
        }
    double cell = margin;
    auto cell_key = [&](const Vec2& v) {
        return std::make_pair((long long)std::floor(v.x / cell), (long long)std::floor(v.y / cell));
    };
    std::map<std::pair<long long, long long>, std::vector<int>> grid;
    for (size_t i = 0; i < pts.size(); ++i) grid[cell_key(pts[i])].push_back((int)i);
    for (size_t i = 0; i < pts.size(); ++i) {
        auto [cx, cy] = cell_key(pts[i]);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({cx + dx, cy + dy});
                if (it == grid.end()) continue;
                for (int j : it->second) {
                    if (j <= (int)i) continue;
                    double d = dist(pts[i], pts[j]);
                    if (d < 1e-6) continue;  // same penetration, quantization stragglers
                    if (d < margin - 1e-9)
                        throw validation_error(
                            "SpacingInfeasible",
                            msgf("needle points (%.3f,%.3f) of run %d and (%.3f,%.3f) of run %d are "
                                 "%.3fmm apart, minimum is %.3fmm",
                                 pts[i].x, pts[i].y, owner[i], pts[j].x, pts[j].y, owner[j], d, margin));
                }
            }
    }
}

std::string program_digest(const StitchProgram& prog) {
    std::string out;
    char buf[160];
    for (const auto& r : prog.runs) {
        snprintf(buf, sizeof buf, "run %d %s %s %s f%d g%d p%d\n", r.id, to_string(r.thread),
                 r.tension == Tension::pulled ? "pulled" : "floating", r.tag.c_str(), r.face, r.gap,
                 r.pair);
        out += buf;
        for (const auto& np : r.points) {
            snprintf(buf, sizeof buf, "  %s %.6f %.6f\n", to_string(np.role), np.pos.x, np.pos.y);
            out += buf;
        }
    }
    for (auto& [a, b] : prog.deps) {
        snprintf(buf, sizeof buf, "dep %d %d\n", a, b);
        out += buf;
    }
    return out;
}

}  // namespace stitchfold
