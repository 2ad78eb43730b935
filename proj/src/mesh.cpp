#include "stitchfold/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace stitchfold {

EdgeFaceMap build_edge_map(const TriangleMesh& m) {
    EdgeFaceMap em;
    for (int f = 0; f < int(m.faces.size()); ++f) {
        auto& t = m.faces[f];
        for (int k = 0; k < 3; ++k) {
            EdgeKey e(t[k], t[(k + 1) % 3]);
            auto& inc = em[e];
            if (inc.size() == 2)
                throw validation_error("NonManifoldEdge",
                                       "edge " + std::to_string(e.a) + "-" + std::to_string(e.b) +
                                           " has more than two incident faces");
            inc.push_back(f);
        }
    }
    return em;
}

TriangleMesh load_obj(std::istream& in) {
    TriangleMesh m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments and whitespace
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok)) continue;
        if (tok == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z))
                throw validation_error("ParseError",
                                       "line " + std::to_string(lineno) + ": bad vertex");
            m.verts.push_back({x, y, z});
        } else if (tok == "f") {
            std::vector<int> idx;
            std::string fv;
            while (ss >> fv) {
                // take the vertex index before any '/'; normals and uvs are ignored
                size_t slash = fv.find('/');
                std::string head = slash == std::string::npos ? fv : fv.substr(0, slash);
                try {
                    int i = std::stoi(head);
                    if (i < 0) i = int(m.verts.size()) + i + 1;  // relative indexing
                    idx.push_back(i - 1);
                } catch (...) {
                    throw validation_error("ParseError",
                                           "line " + std::to_string(lineno) + ": bad face index '" +
                                               fv + "'");
                }
            }
            if (idx.size() != 3)
                throw validation_error("NonTriangleFace",
                                       "line " + std::to_string(lineno) + ": face with " +
                                           std::to_string(idx.size()) + " vertices");
            for (int i : idx)
                if (i < 0 || i >= int(m.verts.size()))
                    throw validation_error("ParseError", "line " + std::to_string(lineno) +
                                                             ": vertex index out of range");
            if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2])
                throw validation_error("DegenerateFace", "line " + std::to_string(lineno) +
                                                             ": face repeats a vertex");
            Vec3 a = m.verts[idx[0]], b = m.verts[idx[1]], c = m.verts[idx[2]];
            if (0.5 * cross(b - a, c - a).norm() < 1e-9)
                throw validation_error("DegenerateFace",
                                       "line " + std::to_string(lineno) + ": zero-area face");
            m.faces.push_back({idx[0], idx[1], idx[2]});
        }
        // other record types (vn, vt, o, g, s, mtllib, usemtl) are ignored
    }
    build_edge_map(m);  // manifoldness gate
    return m;
}

TriangleMesh load_obj_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("IoError", "cannot open " + path);
    return load_obj(f);
}

void save_obj(const TriangleMesh& m, std::ostream& out) {
    char buf[128];
    for (auto& v : m.verts) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (auto& f : m.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void save_obj_file(const TriangleMesh& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw io_error("IoError", "cannot open " + path + " for writing");
    save_obj(m, f);
}

MeshReport analyze(const TriangleMesh& m) {
    MeshReport r;
    r.vertex_count = int(m.verts.size());
    r.face_count = int(m.faces.size());
    auto em = build_edge_map(m);
    r.edge_count = int(em.size());
    r.euler_characteristic = r.vertex_count - r.edge_count + r.face_count;

    // boundary loops: components of the boundary-edge graph
    std::map<int, std::vector<int>> bnext;  // vertex -> boundary neighbors
    int boundary_edges = 0;
    for (auto& [e, inc] : em) {
        if (inc.size() == 1) {
            ++boundary_edges;
            bnext[e.a].push_back(e.b);
            bnext[e.b].push_back(e.a);
        }
    }
    std::set<EdgeKey> seen;
    int loops = 0;
    for (auto& [e, inc] : em) {
        if (inc.size() != 1 || seen.count(e)) continue;
        ++loops;
        // walk the loop
        int prev = e.a, cur = e.b;
        seen.insert(e);
        int guard = 0;
        while (cur != e.a && ++guard < boundary_edges + 2) {
            int nxt = -1;
            for (int cand : bnext[cur]) {
                if (cand == prev) continue;
                if (!seen.count(EdgeKey(cur, cand))) {
                    nxt = cand;
                    break;
                }
            }
            if (nxt < 0) break;
            seen.insert(EdgeKey(cur, nxt));
            prev = cur;
            cur = nxt;
        }
    }
    r.boundary_loops = loops;

    double min_edge = 1e300;
    for (auto& [e, inc] : em) min_edge = std::min(min_edge, dist(m.verts[e.a], m.verts[e.b]));
    r.min_edge_mm = m.faces.empty() ? 0.0 : min_edge;

    double min_area = 1e300;
    for (auto& f : m.faces) {
        Vec3 a = m.verts[f[0]], b = m.verts[f[1]], c = m.verts[f[2]];
        min_area = std::min(min_area, 0.5 * cross(b - a, c - a).norm());
    }
    r.min_face_area_mm2 = m.faces.empty() ? 0.0 : min_area;

    r.is_disk = (r.euler_characteristic == 1 && r.boundary_loops == 1);
    return r;
}

namespace {

// One seam cut. Duplicates the chosen vertices for every face on the "right"
// of the chain (chain direction w_i -> w_{i+1}; a face containing that
// directed edge in its own winding is on the left).
TriangleMesh apply_one_cut(const TriangleMesh& m, const SeamCut& cut) {
    auto em = build_edge_map(m);
    const auto& ch = cut.chain;
    if (ch.size() < 2) throw validation_error("CutError", "cut chain needs at least one edge");
    for (int v : ch)
        if (v < 0 || v >= int(m.verts.size()))
            throw validation_error("CutError", "cut references vertex " + std::to_string(v));

    bool cycle = cut.is_cycle();
    std::set<EdgeKey> cut_edges;
    for (size_t i = 0; i + 1 < ch.size(); ++i) {
        EdgeKey e(ch[i], ch[i + 1]);
        auto it = em.find(e);
        if (it == em.end() || it->second.size() != 2)
            throw validation_error("CutError", "cut edge " + std::to_string(e.a) + "-" +
                                                   std::to_string(e.b) +
                                                   " is not an interior edge");
        cut_edges.insert(e);
    }

    // boundary vertices of the current mesh
    std::set<int> boundary_verts;
    for (auto& [e, inc] : em)
        if (inc.size() == 1) {
            boundary_verts.insert(e.a);
            boundary_verts.insert(e.b);
        }

    // which chain vertices split
    std::vector<int> dup_verts;
    size_t lo = 0, hi = ch.size();
    if (cycle) hi -= 1;  // repeated closing vertex
    for (size_t i = lo; i < hi; ++i) {
        bool endpoint = !cycle && (i == 0 || i == ch.size() - 1);
        if (endpoint && !boundary_verts.count(ch[i])) continue;  // slit stays attached
        dup_verts.push_back(ch[i]);
    }

    // directed chain edges, for the left/right rule
    std::set<std::pair<int, int>> forward;
    for (size_t i = 0; i + 1 < ch.size(); ++i) forward.insert({ch[i], ch[i + 1]});

    auto face_has_directed = [&](int f, int a, int b) {
        auto& t = m.faces[f];
        for (int k = 0; k < 3; ++k)
            if (t[k] == a && t[(k + 1) % 3] == b) return true;
        return false;
    };

    TriangleMesh out = m;
    for (int w : dup_verts) {
        // incident faces and their fan adjacency through non-cut edges at w
        std::vector<int> inc_faces;
        for (int f = 0; f < int(m.faces.size()); ++f) {
            auto& t = m.faces[f];
            if (t[0] == w || t[1] == w || t[2] == w) inc_faces.push_back(f);
        }
        std::map<int, int> comp;  // face -> component id
        int ncomp = 0;
        for (int f : inc_faces) {
            if (comp.count(f)) continue;
            // BFS across shared non-cut edges at w
            std::vector<int> stack{f};
            comp[f] = ncomp;
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                auto& t = m.faces[cur];
                for (int k = 0; k < 3; ++k) {
                    int a = t[k], b = t[(k + 1) % 3];
                    if (a != w && b != w) continue;
                    EdgeKey e(a, b);
                    if (cut_edges.count(e)) continue;
                    for (int g : em[e]) {
                        if (g != cur && std::count(inc_faces.begin(), inc_faces.end(), g) &&
                            !comp.count(g)) {
                            comp[g] = ncomp;
                            stack.push_back(g);
                        }
                    }
                }
            }
            ++ncomp;
        }
        if (ncomp < 2)
            throw validation_error("CutError", "cut does not split the fan at vertex " +
                                                   std::to_string(w));

        // label components: left keeps w, right gets the duplicate
        std::vector<int> side(ncomp, -1);
        for (int f : inc_faces) {
            auto& t = m.faces[f];
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (a != w && b != w) continue;
                if (!cut_edges.count(EdgeKey(a, b))) continue;
                int u = (a == w) ? b : a;
                bool left = forward.count({w, u}) ? face_has_directed(f, w, u)
                          : forward.count({u, w}) ? face_has_directed(f, u, w)
                                                  : false;
                int lab = left ? 0 : 1;
                if (side[comp[f]] == -1) side[comp[f]] = lab;
            }
        }
        int dup_id = int(out.verts.size());
        out.verts.push_back(out.verts[w]);
        for (int f : inc_faces) {
            if (side[comp[f]] != 1) continue;
            for (int k = 0; k < 3; ++k)
                if (out.faces[f][k] == w) out.faces[f][k] = dup_id;
        }
    }
    return out;
}

}  // namespace

TriangleMesh apply_cuts(const TriangleMesh& m, const std::vector<SeamCut>& cuts) {
    TriangleMesh cur = m;
    for (auto& c : cuts) cur = apply_one_cut(cur, c);
    return cur;
}

ResolutionResult enforce_resolution(const TriangleMesh& m, double min_edge_mm,
                                    ResolutionMode mode) {
    MeshReport r = analyze(m);
    if (r.min_edge_mm >= min_edge_mm - 1e-9) return {m, 1.0};
    if (mode == ResolutionMode::reject)
        throw validation_error("ResolutionTooFine",
                               "minimum edge " + std::to_string(r.min_edge_mm) + "mm below " +
                                   std::to_string(min_edge_mm) + "mm");
    double s = min_edge_mm / r.min_edge_mm;
    TriangleMesh out = m;
    for (auto& v : out.verts) v = v * s;
    return {out, s};
}

}  // namespace stitchfold
