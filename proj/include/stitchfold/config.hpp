#pragma once
#include <istream>
#include <string>
#include <vector>

#include "stitchfold/mesh.hpp"

namespace stitchfold {

// Every tunable in one place. Defaults are the fabrication values the
// machine profile was calibrated with; a config file overrides by key.
struct Params {
    // material / machine
    double shrink_ratio = 0.30;      // fraction of free thread length recovered
    double safety_factor = 1.2;      // contraction headroom
    double min_edge = 8.4;           // mm, smallest fabricable face edge
    double safety_margin = 0.3;      // mm, minimum needle point spacing
    double channel_width = 0.6;      // mm, guide channel (fits up to 6 threads)

    // resolver
    double angle_threshold = 10.0;   // deg, merge vs hinge-insert boundary
    double coincidence_tol = 0.05;   // mm, Hausdorff for "edges coincide"
    int max_rounds = 20;

    // flattener
    double gap_min_mm = 2.0;
    double gap_max_mm = 0.0;         // 0 = derive per edge from type-4 capacity
    double g0_mm = 3.0;              // initial hinge opening
    int max_iter = 50000;
    double parallel_tol = 1e-6;
    double gap_tol = 1e-3;
    unsigned seed = 1;

    // stitch geometry
    double straight_pitch_mm = 2.5;
    double hold_pitch_mm = 5.0;
    double anchor_inset_mm = 1.5;    // channel line inset from the face edge
    double corner_clearance_mm = 3.0;
    double lock_inset_mm = 1.2;
    double min_span_mm = 2.4;        // smallest usable channel span

    // laser plan
    double bridge_len_mm = 2.0;
    double min_cut_mm = 1.0;
    double reg_square_mm = 5.0;
    double tab_width_mm = 2.0;
    double cut_clearance_mm = 1.0;

    // hooping
    double hoop_w_mm = 180.0, hoop_h_mm = 130.0;
    double hoop_margin_mm = 10.0;

    ResolutionMode resolution_mode = ResolutionMode::reject;
    std::vector<SeamCut> cuts;
};

// key=value lines, '#' comments, unknown keys are hard errors.
// Cuts: "cut = 3-7,7-12,12-3" (edge list forming a chain, repeatable).
Params load_config(std::istream& in);
Params load_config_file(const std::string& path);
// Re-emits the effective configuration, echoed into the conversion report.
std::string dump_config(const Params& p);

}  // namespace stitchfold
