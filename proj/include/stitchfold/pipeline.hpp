#pragma once
#include <string>
#include <vector>

#include "stitchfold/exportio.hpp"
#include "stitchfold/fabplan.hpp"
#include "stitchfold/flatten.hpp"
#include "stitchfold/hinge.hpp"
#include "stitchfold/hoop.hpp"
#include "stitchfold/mesh.hpp"
#include "stitchfold/oracle.hpp"
#include "stitchfold/resolve.hpp"
#include "stitchfold/stitch.hpp"

namespace stitchfold {

// Everything one conversion produces, kept live for inspection.
struct PipelineResult {
    TriangleMesh mesh;  // as fabricated: after cuts and resolution scaling
    double scale = 1.0;
    MeshReport analysis;
    FlatLayout layout;
    std::vector<ResolutionEvent> events;
    HingeSet hinges;
    StitchProgram program;
    FabPlan fab;
    HoopPlan hoops;
    FoldReport fold;
};

// Disk-topology gate shared by convert and validate. Closed or multi-rim
// surfaces are rejected with a cut suggestion.
void require_disk(const MeshReport& rep);

// Full conversion of an in-memory mesh. Stage failures throw Error; set the
// STITCHFOLD_LOG environment variable to get per-stage timing on stderr.
PipelineResult run_pipeline(const TriangleMesh& input, const Params& p);

// Writes sheet.svg, report.json and resolution.jsonl into dir (created if
// missing) and returns the one-paragraph text summary for stdout.
std::string write_outputs(const PipelineResult& r, const Params& p, const std::string& dir);

}  // namespace stitchfold
