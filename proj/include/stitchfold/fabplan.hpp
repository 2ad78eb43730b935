#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stitchfold/config.hpp"
#include "stitchfold/flatten.hpp"
#include "stitchfold/hinge.hpp"
#include "stitchfold/stitch.hpp"

namespace stitchfold {

// One laser toolpath. Tab bridges are deliberate gaps in a removal loop —
// bookkeeping, not cuts; exporters must not feed them to the cutter.
struct CutPath {
    enum class Kind { crease_dash, outline, excess_removal, tab_bridge, registration_square };
    Kind kind;
    std::vector<Vec2> pts;
    bool closed = false;
    int gap = -1;   // crease dashes: the hinge they score
    int hole = -1;  // removal loops, squares, tabs: the excess hole; -1 = outline
};

const char* to_string(CutPath::Kind k);

// [bridge][cut][bridge][cut][bridge] layout along one crease of length `len`.
// End bridges may be wider than nominal where thread crossings need cover.
// Returns the two cut intervals; empty when the bridges leave no room for two
// cuts of min_cut each. Throws CreaseTooShort below the nominal minimum.
std::vector<std::pair<double, double>> dash_sections(double len, double bridge_u, double bridge_v,
                                                     double bridge, double min_cut);

struct FabPlan {
    std::vector<CutPath> cuts;
};

FabPlan plan_fabrication(const FlatLayout& fl, const HingeSet& hs, const StitchProgram& prog,
                         const Params& p);

// Every cut stays cut_clearance from every needle point and crosses no thread.
void validate_fab(const FabPlan& plan, const StitchProgram& prog, const Params& p);

std::string fab_digest(const FabPlan& plan);

// Standalone calibration coupon: two minimum-size faces and the narrowest
// hinge whose plain span-and-crossing thread still meets the contraction
// requirement, used to dial in actuation temperature.
struct Gauge {
    FlatLayout layout;
    HingeSet hinges;
    StitchProgram program;
    FabPlan fab;
};
Gauge make_gauge(const Params& p);

}  // namespace stitchfold
