#pragma once
#include <utility>
#include <vector>

#include "stitchfold/flatten.hpp"
#include "stitchfold/hinge.hpp"

namespace stitchfold {

// Closure audit. Every layout face carries the rigid motion that placed it
// on the sheet; composing the inverse of that motion with the face's
// original 3D frame puts the emitted geometry back onto the input mesh.
// A hinge closes iff both faces map their shared edge to the same segment.
struct FoldReport {
    double max_vertex_deviation = 0;  // untouched faces: corner vs mesh vertex
    double max_edge_residual = 0;     // worst closure mismatch over live hinges
    std::vector<std::pair<int, double>> edge_residual;     // gap id -> mismatch (mm)
    std::vector<std::pair<int, double>> merged_deviation;  // face id -> dist to best-fit plane
    std::vector<std::pair<int, bool>> tuck_ok;             // gap id -> folded band fits behind
    int boundary_edges = 0;  // open-rim edges: counted, never penalized
};

// Maps the sheet back onto the mesh and measures what the fold would miss.
// Faces the resolver fused are compared against the best-fit plane of their
// source triangles instead of exact vertices (fusing trims geometry on
// purpose). Hinges the resolver inserted have no mesh edge and are skipped.
// When the hinge set is given, harmonica-routed hinges (type 4) get the
// halved tuck depth their double fold produces.
// Throws CorrespondenceMissing when a face's bookkeeping no longer reaches
// the mesh (bad face index, missing source for a hinge endpoint).
FoldReport reconstruct(const TriangleMesh& mesh, const FlatLayout& layout,
                       const HingeSet* hinges = nullptr);

// True when the band spanning the gap, folded back about its midline, hangs
// behind the joined faces without stabbing any other face of the target
// shape. depth = how far the folded band protrudes past the crease.
bool tuck_feasibility(const TriangleMesh& mesh, const EdgeGap& gap, double depth);

}  // namespace stitchfold
