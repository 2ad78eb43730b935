#include "stitchfold/hinge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stitchfold/errors.hpp"

namespace stitchfold {

double usable_span(double len, double corner_clearance) {
    return std::max(0.0, len - 2.0 * corner_clearance);
}

double perimeter_spans(const Poly& face, double corner_clearance) {
    double total = 0;
    for (size_t i = 0; i < face.size(); ++i)
        total += usable_span(dist(face[i], face[(i + 1) % face.size()]), corner_clearance);
    return total;
}

double free_length_for(int type, double La, double Lb, double Pa, double Pb, double s) {
    switch (type) {
        case 1: return La + Lb + s;
        case 2: return Pa + Pb + 2 * s;
        case 3: return 2 * (Pa + Pb) + 2 * s;
        case 4: return 2 * (Pa + Pb) + La + Lb + 3 * s;
    }
    throw validation_error("InternalError", "hinge type out of range");
}

int select_type(double La, double Lb, double Pa, double Pb, double s, double shrink, double safety) {
    for (int t = 1; t <= 4; ++t)
        if (shrink * free_length_for(t, La, Lb, Pa, Pb, s) >= safety * s) return t;
    return 0;
}

double max_separation_type4(double La, double Lb, double Pa, double Pb, double shrink, double safety) {
    double slope = safety - 3.0 * shrink;
    if (slope <= 0) return 1e9;
    return shrink * (2.0 * (Pa + Pb) + La + Lb) / slope;
}

namespace {

struct SideSpan {
    Vec2 s0, s1;  // cc-trimmed span, empty when the side is too short
    bool empty;
};

SideSpan trim_side(const Vec2& a, const Vec2& b, double cc) {
    double len = dist(a, b);
    if (len <= 2 * cc + 1e-12) return {a, b, true};
    Vec2 t = (b - a) / len;
    return {a + t * cc, b - t * cc, false};
}

int locate_vertex(const Poly& poly, const Vec2& q) {
    for (int i = 0; i < (int)poly.size(); ++i)
        if (dist(poly[i], q) < 1e-6) return i;
    return -1;
}

// One full lap of the face boundary: all sides in winding order beginning
// with the side that starts at vertex `first`, anchored at `anchor` (a
// cc-trimmed span endpoint). Spans every side, hopping corner clearances,
// and returns to the anchor; span lengths sum to perimeter_spans(poly).
void perimeter_loop(std::vector<HingeSegment>& out, const Poly& poly, int first, const Vec2& anchor,
                    double cc) {
    const int n = (int)poly.size();
    Vec2 at = anchor;
    for (int k = 0; k < n; ++k) {
        int i = (first + k) % n, j = (i + 1) % n;
        SideSpan sp = trim_side(poly[i], poly[j], cc);
        if (sp.empty) continue;
        if (dist(at, sp.s0) > 1e-12) out.push_back({HingeSegment::hop, at, sp.s0});
        out.push_back({HingeSegment::span, sp.s0, sp.s1});
        at = sp.s1;
    }
    if (dist(at, anchor) > 1e-12) out.push_back({HingeSegment::hop, at, anchor});
}

}  // namespace

std::vector<HingeSegment> build_skeleton(const EdgeGap& gap, const Poly& face_a, const Poly& face_b,
                                         int type, double cc) {
    SideSpan sa = trim_side(gap.a_u, gap.a_v, cc);
    SideSpan sb = trim_side(gap.b_u, gap.b_v, cc);
    if (sa.empty || sb.empty)
        throw validation_error("GapExceedsType4",
                               "hinge edge too short to anchor (gap " + std::to_string(gap.id) + ")");
    Vec2 A0 = sa.s0, A1 = sa.s1, B0 = sb.s0, B1 = sb.s1;

    // In face_a's winding the hinge side runs a_u -> a_v, so its lap leads
    // with that side, anchored at A0. In face_b's winding the side runs
    // b_v -> b_u; anchoring at B0 (the trimmed end at b_u) means the lap
    // starts with the side AFTER the hinge and finishes along it, landing
    // back on B0. Crossings pair reflection-corresponding endpoints only.
    int au = locate_vertex(face_a, gap.a_u);
    int bu = locate_vertex(face_b, gap.b_u);
    if (type >= 2 && (au < 0 || bu < 0 || locate_vertex(face_a, gap.a_v) < 0 ||
                      locate_vertex(face_b, gap.b_v) < 0))
        throw validation_error("InternalError",
                               "hinge edge not found on face boundary (gap " + std::to_string(gap.id) + ")");

    std::vector<HingeSegment> out;
    auto lap_a = [&] { perimeter_loop(out, face_a, au, A0, cc); };
    auto lap_b = [&] { perimeter_loop(out, face_b, bu, B0, cc); };
    switch (type) {
        case 1:
            out.push_back({HingeSegment::span, A0, A1});
            out.push_back({HingeSegment::crossing, A1, B1});
            out.push_back({HingeSegment::span, B1, B0});
            break;
        case 2:
            lap_a();
            out.push_back({HingeSegment::crossing, A0, B0});
            lap_b();
            out.push_back({HingeSegment::crossing, B0, A0});
            break;
        case 3:
            lap_a();
            lap_a();
            out.push_back({HingeSegment::crossing, A0, B0});
            lap_b();
            lap_b();
            out.push_back({HingeSegment::crossing, B0, A0});
            break;
        case 4:
            lap_a();
            lap_a();
            out.push_back({HingeSegment::crossing, A0, B0});
            lap_b();
            lap_b();
            out.push_back({HingeSegment::span, B0, B1});
            out.push_back({HingeSegment::crossing, B1, A1});
            out.push_back({HingeSegment::span, A1, A0});
            out.push_back({HingeSegment::crossing, A0, B0});
            break;
        default:
            throw validation_error("InternalError", "hinge type out of range");
    }
    return out;
}

std::string HingeSet::histogram_str() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%d", histogram[0], histogram[1], histogram[2], histogram[3]);
    return buf;
}

HingeSet plan_hinges(const FlatLayout& fl, const Params& p) {
    HingeSet set;
    double cc = p.corner_clearance_mm;
    for (const EdgeGap& g : fl.gaps) {
        if (!g.alive) continue;
        const LayoutFace& fa = fl.faces[g.face_a];
        const LayoutFace& fb = fl.faces[g.face_b];
        double La = usable_span(g.dir_a().norm(), cc);
        double Lb = usable_span(g.dir_b().norm(), cc);
        double Pa = perimeter_spans(fa.poly, cc);
        double Pb = perimeter_spans(fb.poly, cc);
        double s = g.separation();
        int type = select_type(La, Lb, Pa, Pb, s, p.shrink_ratio, p.safety_factor);
        if (type == 0) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "gap %d (faces %d/%d): separation %.3f mm needs %.3f mm of contraction, "
                          "type-4 capacity is %.3f mm",
                          g.id, g.face_a, g.face_b, s, p.safety_factor * s,
                          p.shrink_ratio * free_length_for(4, La, Lb, Pa, Pb, s));
            throw validation_error("GapExceedsType4", buf);
        }
        HingePlan plan;
        plan.gap_id = g.id;
        plan.type = type;
        plan.separation = s;
        plan.required_contraction = p.safety_factor * s;
        plan.free_length = free_length_for(type, La, Lb, Pa, Pb, s);
        plan.capacity = p.shrink_ratio * plan.free_length;
        plan.skeleton = build_skeleton(g, fa.poly, fb.poly, type, cc);
        set.histogram[type - 1]++;
        set.plans.push_back(std::move(plan));
    }
    return set;
}

std::vector<double> gap_caps(const WorkingLayout& L, const Params& p) {
    std::vector<double> caps;
    caps.reserve(L.edges.size());
    double cc = p.corner_clearance_mm;
    for (const auto& e : L.edges) {
        double len = dist(L.intrinsic[e.fa][e.ua], L.intrinsic[e.fa][e.va]);
        double span = usable_span(len, cc);
        double Pa = perimeter_spans(L.intrinsic[e.fa], cc);
        double Pb = perimeter_spans(L.intrinsic[e.fb], cc);
        double cap = max_separation_type4(span, span, Pa, Pb, p.shrink_ratio, p.safety_factor);
        if (p.gap_max_mm > 0) cap = std::min(cap, p.gap_max_mm);
        if (cap < p.gap_min_mm) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "edge %d-%d: max closable separation %.3f mm is below the minimum gap %.3f mm",
                          e.u, e.v, cap, p.gap_min_mm);
            throw validation_error("GapExceedsType4", buf);
        }
        caps.push_back(cap);
    }
    return caps;
}

}  // namespace stitchfold
