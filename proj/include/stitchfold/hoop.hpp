#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stitchfold/config.hpp"
#include "stitchfold/fabplan.hpp"
#include "stitchfold/flatten.hpp"
#include "stitchfold/stitch.hpp"

namespace stitchfold {

// One embroidery stage: where the machine window sits on the sheet and what
// gets stitched while the fabric is clamped there.
struct Hoop {
    Vec2 lo, hi;             // window box in sheet coordinates
    std::vector<int> faces;  // faces whose own stitching happens here
    std::vector<int> runs;   // run ids, already in stitch order
    std::vector<int> regs;   // registration squares visible in this window
};

struct HoopPlan {
    std::vector<Hoop> hoops;                // fabrication order
    std::vector<std::pair<int, int>> deps;  // stage a is clamped before stage b
    std::vector<CutPath> squares;           // registration squares; cut-plan ones first
    int fab_squares = 0;                    // squares[0..fab_squares) came from the cut plan
};

// Split the program into hoop-sized stages by greedy growth over the face
// adjacency graph, seeded at the leftmost face. Faces join the open stage
// while everything stitched there still fits the window (hoop minus margin);
// a hinge whose faces land in different stages does all of its thread work
// in the later one. Every non-first stage shares at least one registration
// square with an earlier stage, cutting a fresh one into waste fabric when
// the hole squares don't line up. Throws RunTooLarge when a single face
// cannot fit any window, InfeasiblePartition when a face only overflows
// through inherited hinge work or no shared square can be placed.
HoopPlan partition(const FlatLayout& fl, const StitchProgram& prog, const FabPlan& fab,
                   const Params& p);

// Sequencing audit: a shrinking thread may not be looped in before the
// structural stitching of either face it anchors to. Returns one message per
// offending thread/face pair; empty means the ordering is fabricable.
std::vector<std::string> validate_sequence(const HoopPlan& plan, const StitchProgram& prog,
                                           const FlatLayout& fl);

// Operator-facing stage listing: window boxes, run counts, shared squares.
std::string hoop_manifest(const HoopPlan& plan);

}  // namespace stitchfold
