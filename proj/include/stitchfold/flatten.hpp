#pragma once
#include <array>
#include <vector>

#include "stitchfold/config.hpp"
#include "stitchfold/geom.hpp"
#include "stitchfold/mesh.hpp"

namespace stitchfold {

// Rigid motion taking a face's intrinsic (unfolded) frame into the sheet.
struct FacePlacement {
    double rot = 0;
    Vec2 trans;
    Vec2 apply(const Vec2& xi) const { return rotate(xi, rot) + trans; }
    Vec2 invert(const Vec2& p) const { return rotate(p - trans, -rot); }
};

struct FaceSource {
    int mesh_face;
    FacePlacement place;
};

// One region of the laid-out sheet. Starts as the image of a single mesh
// face; the resolver may trim it or fuse several into one.
struct LayoutFace {
    int id = -1;
    Poly poly;
    std::vector<FaceSource> sources;
    bool alive = true;
    bool clipped = false;
    bool pristine() const { return sources.size() == 1 && !clipped; }
};

// The open strip between two faces that a hinge will bridge. Images of the
// shared mesh edge are stored explicitly: a_* on face_a, b_* on face_b,
// endpoints in the same u,v order.
struct EdgeGap {
    int id = -1;
    int face_a = -1, face_b = -1;
    int mesh_u = -1, mesh_v = -1;  // -1 on hinges inserted by the resolver
    Vec2 a_u, a_v, b_u, b_v;
    bool tree = false;     // gap sits on the layout's unfold tree
    bool inserted = false;
    bool alive = true;
    double gap_lo = 0, gap_hi = 0;

    Vec2 dir_a() const { return a_v - a_u; }
    Vec2 dir_b() const { return b_v - b_u; }
    Vec2 mid_a() const { return (a_u + a_v) * 0.5; }
    Vec2 mid_b() const { return (b_u + b_v) * 0.5; }
    double length() const { return 0.5 * (dir_a().norm() + dir_b().norm()); }
    Vec2 ehat() const;                // mean edge direction (u toward v)
    Vec2 nhat() const;                // across the gap, face_a toward face_b
    double separation() const;        // signed width along nhat
    double glide() const;             // tangential mismatch; 0 = exact mirror
    double angle_mismatch() const;    // radians between the two edge images
    Line midline() const;             // reflection axis of the gap
    Poly band() const;                // CCW quad spanning the gap
};

// Optimizer state: one global rotation plus a translation per face.
// Per-face rotations are chained offsets fixed at initialization, so every
// unfold-tree gap stays exactly parallel by construction.
struct WorkingLayout {
    TriangleMesh mesh;
    std::vector<Poly> intrinsic;   // per-face development, CCW
    std::vector<double> delta;     // chained rotation offsets
    std::vector<int> parent;       // unfold tree, -1 at root
    int root = 0;
    double theta = 0;
    std::vector<Vec2> trans;

    struct IEdge {
        int u, v;       // mesh vertices; fa holds u->v in its winding
        int fa, fb;
        int ua, va;     // corner indices of u,v within fa
        int ub, vb;     // within fb
        bool tree = false;
        double gap_lo = 2.0, gap_hi = 1e9;
    };
    std::vector<IEdge> edges;

    FacePlacement placement(int f) const { return {theta + delta[f], trans[f]}; }
    Vec2 place(int f, const Vec2& xi) const { return placement(f).apply(xi); }
    Poly face_poly(int f) const;
};

// Isometric development of each face into its own 2D frame.
std::vector<Poly> unfold_faces(const TriangleMesh& mesh);

// Dual-tree unfold with each tree gap opened by g0, then scaled radially
// outward until no two faces overlap. Deterministic for a given seed.
WorkingLayout initialize_layout(const TriangleMesh& mesh, const Params& p);

// Per-edge upper gap bounds, parallel to layout.edges (hinge capacity caps).
void set_gap_caps(WorkingLayout& layout, const std::vector<double>& hi);

enum : unsigned { E_OVERLAP = 1u, E_GAP = 2u, E_GLIDE = 4u, E_ALL = 7u };

struct EnergyGrad {
    double d_theta = 0;
    std::vector<Vec2> d_trans;
};

struct EnergyTerms {
    double overlap = 0;   // sum of squared pairwise face intersection areas
    double gap = 0;       // squared out-of-range gap widths
    double glide = 0;     // squared mirror-symmetry defects
    double angle = 0;     // squared edge-image wedge angles (not optimized:
                          // fixed by rotation chaining, nonzero off-tree)
    double objective() const { return overlap + gap + glide; }
};

// Evaluates the layout energy; fills grad (d objective / d state) if given.
EnergyTerms eval_energy(const WorkingLayout& layout, EnergyGrad* grad, unsigned mask = E_ALL);

struct EnergyBreakdown {
    double total = 0;
    double overlap_term = 0;
    double gap_range_term = 0;
    double parallelism_residual = 0;  // glide_part + angle_part
    double glide_part = 0;
    double angle_part = 0;
    int iterations = 0;
    bool converged = false;
};

// Damped gradient descent with backtracking line search. Stops when the
// relative energy drop stays under 1e-8 for 20 iterations (converged) or at
// p.max_iter (converged=false; layout still usable).
EnergyBreakdown optimize(WorkingLayout& layout, const Params& p);

// Freezes the optimizer state into explicit geometry for fabrication.
struct FlatLayout {
    TriangleMesh mesh;
    std::vector<Poly> intrinsic;
    std::vector<LayoutFace> faces;  // faces[i].id == i, dead ones flagged
    std::vector<EdgeGap> gaps;      // gaps[i].id == i, dead ones flagged
    std::vector<Poly> shavings;     // off-cuts produced while untangling; laser removes them
};

FlatLayout snapshot(const WorkingLayout& layout);

struct OverlapEntry {
    enum Kind { face_face, face_band, band_band } kind;
    int a, b;     // face ids, or gap id for the band side
    double area;
};

// Every pair with intersection area above 1e-6 mm^2. Faces always; bands
// (hinge gap quads) included unless disabled.
std::vector<OverlapEntry> overlap_report(const FlatLayout& fl, bool include_bands = true);

}  // namespace stitchfold
