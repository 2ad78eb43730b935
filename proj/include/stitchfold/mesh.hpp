#pragma once
#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "stitchfold/errors.hpp"
#include "stitchfold/vec2.hpp"

namespace stitchfold {

struct TriangleMesh {
    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> faces;
};

struct MeshReport {
    int vertex_count = 0;
    int edge_count = 0;
    int face_count = 0;
    int euler_characteristic = 0;
    int boundary_loops = 0;
    double min_edge_mm = 0.0;
    double min_face_area_mm2 = 0.0;
    bool is_disk = false;
};

// Ordered vertex chain; a cycle repeats the first vertex at the end.
struct SeamCut {
    std::vector<int> chain;
    bool is_cycle() const { return chain.size() > 2 && chain.front() == chain.back(); }
};

// Undirected edge -> incident faces (1 or 2; a third is rejected at load).
struct EdgeKey {
    int a, b;
    EdgeKey(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
    bool operator<(const EdgeKey& o) const { return a < o.a || (a == o.a && b < o.b); }
    bool operator==(const EdgeKey& o) const { return a == o.a && b == o.b; }
};
using EdgeFaceMap = std::map<EdgeKey, std::vector<int>>;

EdgeFaceMap build_edge_map(const TriangleMesh& m);  // throws NonManifoldEdge

TriangleMesh load_obj(std::istream& in);
TriangleMesh load_obj_file(const std::string& path);
void save_obj(const TriangleMesh& m, std::ostream& out);
void save_obj_file(const TriangleMesh& m, const std::string& path);

MeshReport analyze(const TriangleMesh& m);

// Applies cuts in order; each opens the mesh along a seam by duplicating
// vertices on one side. Interior path: inner vertices duplicate once, the
// endpoints stay shared. Cycles and boundary-touching endpoints duplicate.
TriangleMesh apply_cuts(const TriangleMesh& m, const std::vector<SeamCut>& cuts);

enum class ResolutionMode { reject, autoscale };

struct ResolutionResult {
    TriangleMesh mesh;
    double scale = 1.0;
};
// Guarantees min edge >= min_edge_mm afterwards, or throws ResolutionTooFine
// in reject mode. Autoscale is idempotent (scale 1.0 when already coarse enough).
ResolutionResult enforce_resolution(const TriangleMesh& m, double min_edge_mm, ResolutionMode mode);

}  // namespace stitchfold
