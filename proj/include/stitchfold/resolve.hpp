#pragma once
#include <string>
#include <vector>

#include "stitchfold/flatten.hpp"

namespace stitchfold {

// Untangles face-face overlaps left after optimization. Three outcomes:
//   full_overlap    — the faces occupy the same region (boundaries coincide
//                     within tolerance, or one sits inside the other): the
//                     smaller is absorbed into the larger, one fabric region
//                     serves both. Any hinge between them disappears.
//   shallow_partial — boundary edges cross at < angle_threshold: the smaller
//                     face is trimmed to the keeper's edge line and the two
//                     are fused into one rigid region (error = trimmed area).
//   steep_partial   — edges cross steeply: both faces are cut back to a
//                     gap_min-wide strip along the crossing bisector and a
//                     fresh hinge is inserted across the strip when the new
//                     chords leave enough anchoring span.

enum class OverlapClass { full_overlap, shallow_partial, steep_partial };

struct Classification {
    OverlapClass cls;
    double angle_deg = 0;       // crossing angle; 90 for containment
    int edge_a = -1, edge_b = -1;  // involved boundary edge indices
    Vec2 crossing;              // crossing point (partial classes)
    bool containment = false;
};

Classification classify_overlap(const Poly& a, const Poly& b, const Params& p);

struct ResolutionEvent {
    int round = 0;
    OverlapClass cls;
    int face_a = -1, face_b = -1;
    double area = 0;          // overlap area that triggered the action
    std::string action;       // "absorbed" | "merged" | "split" | "skipped"
    double trimmed_area = 0;  // geometry sacrificed by a merge
    int dropped_gaps = 0;     // hinges that lost their whole anchor span
    int inserted_gap = -1;    // id of a hinge added across a split
};

std::string to_jsonl(const std::vector<ResolutionEvent>& log);

// Repeated sweep: report overlaps, fix the largest first, skip faces already
// touched this round, re-scan. Success = empty report (bands included).
// Throws UnresolvableIntersections when rounds run out or when only
// band overlaps remain (nothing left to merge or split).
std::vector<ResolutionEvent> resolve_all(FlatLayout& fl, const Params& p);

}  // namespace stitchfold
