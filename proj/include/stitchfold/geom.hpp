#pragma once
#include <array>
#include <optional>
#include <vector>

#include "stitchfold/vec2.hpp"

// Small 2D kernel used by the layout stages. Everything works in mm on
// simple polygons stored CCW. Overlap areas come from orientation-predicate
// clipping (never sampling); the clipper keeps per-edge provenance so the
// optimizer can assemble exact area gradients from boundary flux.

namespace stitchfold {

using Poly = std::vector<Vec2>;

// > 0 when c is left of a->b, twice the signed triangle area.
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

double polygon_area(const Poly& p);  // signed, CCW positive
Vec2 polygon_centroid(const Poly& p);
bool polygon_is_simple(const Poly& p);
bool point_in_polygon(const Vec2& q, const Poly& p);  // boundary counts as inside

struct BBox {
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    void add(const Vec2& p);
    void add(const BBox& b);
    bool overlaps(const BBox& o, double pad = 0.0) const;
    Vec2 size() const { return hi - lo; }
};
BBox polygon_bbox(const Poly& p);

// Directed line through p along unit d; left side (signed_dist > 0) is "kept".
struct Line {
    Vec2 p, d;
    double signed_dist(const Vec2& q) const { return cross(d, q - p); }
    Vec2 project(const Vec2& q) const { return p + d * dot(d, q - p); }
    Vec2 reflect(const Vec2& q) const {
        Vec2 pr = project(q);
        return pr + (pr - q);
    }
};

double point_segment_dist(const Vec2& q, const Vec2& a, const Vec2& b);
double segment_segment_dist(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
// max over endpoints of one segment of the distance to the other, symmetric
double segment_hausdorff(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Proper or touching intersection of [a,b] and [c,d]; t is the parameter on [a,b].
struct SegHit {
    Vec2 point;
    double t, u;
};
std::optional<SegHit> segment_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Sutherland-Hodgman clip of a polygon against one half-plane (keep left of line).
Poly clip_halfplane(const Poly& subject, const Line& ln);
// Convex clip: subject clipped by every edge of a convex CCW polygon.
Poly clip_convex(const Poly& subject, const Poly& convex_clip);

// Clip with edge provenance. Each output vertex carries the tag of the edge
// that STARTS at it: tags 0..k from the subject's own edges keep their index,
// CLIP_EDGE marks pieces of the clip boundary.
constexpr int CLIP_EDGE = -1;
struct TaggedPoly {
    Poly pts;
    std::vector<int> edge_tag;  // tag of edge pts[i] -> pts[i+1]
};
TaggedPoly clip_convex_tagged(const Poly& subject, const Poly& convex_clip);

// Ear-clipping triangulation of a simple CCW polygon; returns index triples.
std::vector<std::array<int, 3>> triangulate(const Poly& p);

// Exact intersection area of two simple CCW polygons (triangulate + convex clips).
double intersection_area(const Poly& a, const Poly& b);

// Intersection area of two triangles plus its derivatives: translation of
// either triangle and rotation of either triangle about its own anchor point.
struct OverlapGrad {
    double area = 0.0;
    Vec2 d_ta{0, 0}, d_tb{0, 0};
    double d_rot_a = 0.0, d_rot_b = 0.0;
};
OverlapGrad triangle_overlap_grad(const Poly& tri_a, const Poly& tri_b,
                                  const Vec2& anchor_a, const Vec2& anchor_b);

// General simple-polygon version (triangulates both, sums piecewise flux).
OverlapGrad polygon_overlap_grad(const Poly& a, const Poly& b,
                                 const Vec2& anchor_a, const Vec2& anchor_b);

// Split a simple polygon by a line; returns the pieces on the kept (left) side.
// Degenerate slivers below area_eps are dropped.
std::vector<Poly> split_polygon(const Poly& p, const Line& ln, double area_eps = 1e-12);

// Union of two simple polygons whose interiors overlap transversally.
// Returns the largest resulting ring. Thin backend over a mature boolean; all
// degenerate (shared-edge) merges are handled elsewhere by boundary gluing.
Poly union_overlapping(const Poly& a, const Poly& b);

// Drop consecutive duplicates / collinear spikes; keeps winding.
Poly dedupe_polygon(const Poly& p, double eps = 1e-9);

}  // namespace stitchfold
