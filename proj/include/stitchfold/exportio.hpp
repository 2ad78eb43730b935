#pragma once

#include <array>
#include <string>
#include <vector>

#include "stitchfold/fabplan.hpp"
#include "stitchfold/hoop.hpp"
#include "stitchfold/resolve.hpp"
#include "stitchfold/stitch.hpp"

namespace stitchfold {

// Layered vector output: one `cut` layer for the laser, one
// `stitch-hoop-<k>` layer per clamping. Millimeter user units, flat
// coordinates, no transforms; crease dashes stay discrete segments. Stroke
// color encodes the thread: shrink red, structural grey, fold anchors
// black, soluble holds orange. Tab bridges ride along in the cut layer but
// keep their kind so no cutter driver traces them.
void write_svg(const FabPlan& fab, const HoopPlan& hoops, const StitchProgram& prog,
               const std::string& path);

struct SvgBundle {
    FabPlan fab;
    HoopPlan hoops;
    StitchProgram prog;
};

// Strict inverse of write_svg; only accepts files it produced. Throws
// FormatError on anything else, IoError when the file cannot be read.
SvgBundle read_svg(const std::string& path);

// Conversion summary for the operator and for tooling.
struct Report {
    int faces = 0;     // rigid regions in the final layout
    int merges = 0;    // overlaps settled by fusing faces
    int resolved = 0;  // overlap events acted on in total
    std::array<int, 4> hinge_histogram{0, 0, 0, 0};
    int hoops = 0;
    std::string config_echo;
};

Report make_report(const FlatLayout& fl, const std::vector<ResolutionEvent>& log,
                   const HingeSet& hs, const HoopPlan& plan, const Params& p);
std::string report_text(const Report& r);
std::string report_json(const Report& r);  // the schema field versions the layout

}  // namespace stitchfold
