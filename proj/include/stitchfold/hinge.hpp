#pragma once
#include <array>
#include <string>
#include <vector>

#include "stitchfold/flatten.hpp"

namespace stitchfold {

// Contraction capacity model. A hinge closes by shrinking thread; how much
// length is available to shrink depends on how the run is routed:
//   type 1: along both hinge edge spans, one crossing
//   type 2: one lap of each face perimeter, two crossings
//   type 3: two laps of each face perimeter, two crossings
//   type 4: two laps of each, plus both hinge spans again, three crossings
// Only span and crossing segments contract; corner hops are pinned by the
// lock clusters they pass over.

// Anchorable length of one edge once the corner clearance is trimmed.
double usable_span(double len, double corner_clearance);
// Sum of usable spans over every side of a face polygon.
double perimeter_spans(const Poly& face, double corner_clearance);

// Contracting length for a routing type given hinge spans La/Lb, perimeter
// span sums Pa/Pb and gap separation s.
double free_length_for(int type, double La, double Lb, double Pa, double Pb, double s);

// Smallest type whose capacity (shrink * free length) covers safety * s;
// 0 when even type 4 falls short.
int select_type(double La, double Lb, double Pa, double Pb, double s, double shrink, double safety);

// Largest separation a type-4 routing can close. Infinite (1e9) when the
// capacity grows at least as fast as the requirement.
double max_separation_type4(double La, double Lb, double Pa, double Pb, double shrink, double safety);

struct HingeSegment {
    enum Kind { span, crossing, hop } kind;
    Vec2 a, b;
    double length() const { return dist(a, b); }
};

struct HingePlan {
    int gap_id = -1;
    int type = 0;
    double separation = 0;
    double required_contraction = 0;  // safety * separation
    double free_length = 0;           // formula value
    double capacity = 0;              // shrink * free_length
    std::vector<HingeSegment> skeleton;
};

struct HingeSet {
    std::vector<HingePlan> plans;      // one per live gap, ascending gap id
    std::array<int, 4> histogram{0, 0, 0, 0};
    std::string histogram_str() const;  // "t1,t2,t3,t4"
};

// Routing skeleton for one gap at a forced type. Exposed for the length
// oracle tests; plan_hinges uses it with the selected type.
std::vector<HingeSegment> build_skeleton(const EdgeGap& gap, const Poly& face_a, const Poly& face_b,
                                         int type, double corner_clearance);

// Plans every live gap; throws GapExceedsType4 naming the first gap that no
// routing can close.
HingeSet plan_hinges(const FlatLayout& fl, const Params& p);

// Per-interior-edge separation caps for the optimizer, from the intrinsic
// face shapes (pre-layout). Honors a positive config override as a ceiling.
// Throws GapExceedsType4 if some edge cannot support even gap_min.
std::vector<double> gap_caps(const WorkingLayout& L, const Params& p);

}  // namespace stitchfold
