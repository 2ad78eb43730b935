#pragma once
#include <string>
#include <vector>

#include "stitchfold/flatten.hpp"
#include "stitchfold/hinge.hpp"

namespace stitchfold {

// Where the needle goes through, and why.
enum class PointRole { lock, channel, fold_top, fold_bobbin_anchor, soluble_hold };
enum class ThreadRole { shrink, structural_top, structural_bobbin, soluble_bobbin };
enum class Tension { pulled, floating };

struct NeedlePoint {
    Vec2 pos;
    PointRole role = PointRole::channel;
};

struct StitchRun {
    int id = -1;
    ThreadRole thread = ThreadRole::structural_top;
    Tension tension = Tension::pulled;
    std::vector<NeedlePoint> points;
    int face = -1;    // owning face for lock/channel work
    int gap = -1;     // owning hinge for fold/shrink/hold work
    std::string tag;  // "lock" | "channel" | "fold" | "shrink" | "hold"
    int pair = -1;    // id of the run sharing these penetrations (fold and shrink pairs)
};

struct StitchProgram {
    std::vector<StitchRun> runs;
    std::vector<std::pair<int, int>> deps;  // run id a fabricated before run id b
};

// Expand a polyline skeleton into needle points: endpoints kept, every
// interior corner gets exactly three points (apex plus one 0.6mm down each
// arm), straight stretches subdivided at `pitch`. Throws SpacingInfeasible
// when the skeleton is too cramped to honor `margin`.
std::vector<NeedlePoint> place_needle_points(const std::vector<Vec2>& skeleton, double pitch,
                                             double margin, PointRole role);

// Zigzag pre-creasing pair straddling a crease segment. `face_out` is the
// unit normal pointing from the crease into the face; the band side gets
// `amp_band`, the face side a fixed 1.2mm throw. Mountain creases carry the
// shrinking thread on the bobbin, valley creases on top.
std::pair<StitchRun, StitchRun> fold_pair(Vec2 c0, Vec2 c1, Vec2 face_out, bool mountain,
                                          double amp_band, const Params& p);

// Soluble bobbin run pinning a floating shrink run, snapped to every k-th of
// its penetrations so the holds reuse existing holes.
StitchRun soluble_holds_for(const StitchRun& shrink, const Params& p);

// Full program for a resolved layout: per-face lock clusters and channel
// rows (shared by all incident hinges), per-hinge fold pairs, shrink thread
// pairs routed through the channels, and soluble holds. Deterministic.
StitchProgram assemble_program(const FlatLayout& fl, const HingeSet& hs, const Params& p);

// Exhaustive pairwise needle-point spacing check over the whole program via
// a spatial grid; exact shared coordinates count as one penetration.
// Throws SpacingInfeasible naming the first offending pair.
void check_spacing(const StitchProgram& prog, double margin);

// Stable text serialization used for determinism checks and digests.
std::string program_digest(const StitchProgram& prog);

const char* to_string(PointRole r);
const char* to_string(ThreadRole r);

}  // namespace stitchfold
