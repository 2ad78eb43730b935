#include "stitchfold/oracle.hpp"

#include <algorithm>
#include <cstdio>

#include "stitchfold/errors.hpp"

namespace stitchfold {
namespace {

// Orthonormal frame of a mesh face, chosen to invert the development used
// by unfold_faces: origin at the first corner, x along the first edge, y in
// the face plane toward the third corner.
struct Frame {
    Vec3 o, ex, ey;
    Vec3 at(const Vec2& xi) const { return o + ex * xi.x + ey * xi.y; }
};

Frame face_frame(const TriangleMesh& m, int f) {
    const auto& fc = m.faces[f];
    Vec3 a = m.verts[fc[0]], b = m.verts[fc[1]], c = m.verts[fc[2]];
    Vec3 n = cross(b - a, c - a);
    if (n.norm() < 1e-12) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "mesh face %d is degenerate, no frame to fold back into", f);
        throw validation_error("CorrespondenceMissing", buf);
    }
    Vec3 ex = (b - a).normalized();
    Vec3 ey = cross(n.normalized(), ex);
    return {a, ex, ey};
}

bool face_has_vert(const std::array<int, 3>& fc, int v) {
    return fc[0] == v || fc[1] == v || fc[2] == v;
}

// Source of a layout face whose mesh triangle carries both edge vertices.
const FaceSource& source_for_edge(const TriangleMesh& m, const LayoutFace& f, int u, int v,
                                  int gap_id) {
    for (const auto& s : f.sources) {
        if (s.mesh_face < 0 || s.mesh_face >= (int)m.faces.size()) continue;
        const auto& fc = m.faces[s.mesh_face];
        if (face_has_vert(fc, u) && face_has_vert(fc, v)) return s;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "hinge %d: face %d has no source triangle with edge %d-%d",
                  gap_id, f.id, u, v);
    throw validation_error("CorrespondenceMissing", buf);
}

// Segment pq strictly piercing triangle abc. Touching the plane or the
// triangle rim does not count; that keeps shared hinge vertices quiet.
bool seg_hits_tri(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 n = cross(b - a, c - a);
    double nn = n.norm2();
    if (nn < 1e-18) return false;
    double dp = dot(n, p - a), dq = dot(n, q - a);
    if (dp * dq >= 0) return false;
    Vec3 x = p + (q - p) * (dp / (dp - dq));
    double s0 = dot(cross(b - x, c - x), n);
    double s1 = dot(cross(c - x, a - x), n);
    double s2 = dot(cross(a - x, b - x), n);
    double lim = 1e-9 * nn;
    return s0 > lim && s1 > lim && s2 > lim;
}

bool tris_cross(const Vec3 t1[3], const Vec3 t2[3]) {
    for (int k = 0; k < 3; ++k) {
        if (seg_hits_tri(t1[k], t1[(k + 1) % 3], t2[0], t2[1], t2[2])) return true;
        if (seg_hits_tri(t2[k], t2[(k + 1) % 3], t1[0], t1[1], t1[2])) return true;
    }
    return false;
}

}  // namespace

bool tuck_feasibility(const TriangleMesh& mesh, const EdgeGap& gap, double depth) {
    if (gap.mesh_u < 0 || gap.mesh_v < 0) return true;  // no mesh edge to fold at
    if (depth <= 0) return true;
    Vec3 u3 = mesh.verts[gap.mesh_u], v3 = mesh.verts[gap.mesh_v];
    Vec3 e = (v3 - u3).normalized();

    // Outward normals of the two faces meeting at the crease.
    int fa = -1, fb = -1;
    Vec3 nsum{0, 0, 0};
    for (int f = 0; f < (int)mesh.faces.size(); ++f) {
        const auto& fc = mesh.faces[f];
        if (!face_has_vert(fc, gap.mesh_u) || !face_has_vert(fc, gap.mesh_v)) continue;
        Vec3 n = cross(mesh.verts[fc[1]] - mesh.verts[fc[0]], mesh.verts[fc[2]] - mesh.verts[fc[0]]);
        nsum = nsum + n.normalized();
        (fa < 0 ? fa : fb) = f;
    }
    if (fa < 0) return true;

    // The folded band hangs behind the crease, along the inward bisector of
    // the two face planes. A fold-flat pair leaves no room at all.
    Vec3 t = Vec3{0, 0, 0} - nsum;
    t = t - e * dot(t, e);
    if (t.norm() < 1e-9) return false;
    t = t.normalized();

    // Band flap, shrunk a hair so contact at the shared vertices is not a hit.
    double eps = 1e-6;
    Vec3 q0 = u3 + e * eps + t * eps;
    Vec3 q1 = v3 - e * eps + t * eps;
    Vec3 q2 = v3 - e * eps + t * depth;
    Vec3 q3 = u3 + e * eps + t * depth;
    Vec3 flap1[3] = {q0, q1, q2};
    Vec3 flap2[3] = {q0, q2, q3};

    for (int f = 0; f < (int)mesh.faces.size(); ++f) {
        if (f == fa || f == fb) continue;
        const auto& fc = mesh.faces[f];
        Vec3 tri[3] = {mesh.verts[fc[0]], mesh.verts[fc[1]], mesh.verts[fc[2]]};
        if (tris_cross(flap1, tri) || tris_cross(flap2, tri)) return false;
    }
    return true;
}

FoldReport reconstruct(const TriangleMesh& mesh, const FlatLayout& layout, const HingeSet* hinges) {
    FoldReport rep;
    int F = (int)mesh.faces.size();

    for (const auto& f : layout.faces) {
        if (!f.alive) continue;
        for (const auto& s : f.sources) {
            if (s.mesh_face < 0 || s.mesh_face >= F) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "layout face %d references mesh face %d of %d",
                              f.id, s.mesh_face, F);
                throw validation_error("CorrespondenceMissing", buf);
            }
        }
    }

    std::vector<Frame> frames;
    frames.reserve(F);
    for (int m = 0; m < F; ++m) frames.push_back(face_frame(mesh, m));

    // Untouched faces: each emitted corner, pulled back through the layout
    // motion and pushed into the face's 3D frame, must land on its vertex.
    for (const auto& f : layout.faces) {
        if (!f.alive || !f.pristine() || f.poly.size() != 3) continue;
        int m = f.sources[0].mesh_face;
        for (int k = 0; k < 3; ++k) {
            Vec3 back = frames[m].at(f.sources[0].place.invert(f.poly[k]));
            double d = dist(back, mesh.verts[mesh.faces[m][k]]);
            rep.max_vertex_deviation = std::max(rep.max_vertex_deviation, d);
        }
    }

    // Hinge closure: both sides of a gap map their copy of the shared edge
    // back to 3D; the fold shuts iff the two images coincide.
    for (const auto& g : layout.gaps) {
        if (!g.alive || g.mesh_u < 0 || g.mesh_v < 0) continue;
        const auto& sa = source_for_edge(mesh, layout.faces[g.face_a], g.mesh_u, g.mesh_v, g.id);
        const auto& sb = source_for_edge(mesh, layout.faces[g.face_b], g.mesh_u, g.mesh_v, g.id);
        Vec3 au = frames[sa.mesh_face].at(sa.place.invert(g.a_u));
        Vec3 av = frames[sa.mesh_face].at(sa.place.invert(g.a_v));
        Vec3 bu = frames[sb.mesh_face].at(sb.place.invert(g.b_u));
        Vec3 bv = frames[sb.mesh_face].at(sb.place.invert(g.b_v));
        double r = std::max(dist(au, bu), dist(av, bv));
        rep.edge_residual.push_back({g.id, r});
        rep.max_edge_residual = std::max(rep.max_edge_residual, r);

        double depth = g.separation() * 0.5;
        if (hinges) {
            for (const auto& pl : hinges->plans)
                if (pl.gap_id == g.id && pl.type == 4) depth *= 0.5;  // harmonica folds twice
        }
        rep.tuck_ok.push_back({g.id, tuck_feasibility(mesh, g, depth)});
    }

    // Fused faces are one rigid piece standing in for several triangles;
    // report how far those triangles sit from their common best-fit plane.
    for (const auto& f : layout.faces) {
        if (!f.alive || f.sources.size() < 2) continue;
        Vec3 nrm{0, 0, 0}, cen{0, 0, 0};
        int npts = 0;
        for (const auto& s : f.sources) {
            const auto& fc = mesh.faces[s.mesh_face];
            nrm = nrm + cross(mesh.verts[fc[1]] - mesh.verts[fc[0]],
                              mesh.verts[fc[2]] - mesh.verts[fc[0]]);
            for (int k = 0; k < 3; ++k) {
                cen = cen + mesh.verts[fc[k]];
                ++npts;
            }
        }
        if (nrm.norm() < 1e-12) continue;
        nrm = nrm.normalized();
        cen = cen / npts;
        double dev = 0;
        for (const auto& s : f.sources) {
            const auto& fc = mesh.faces[s.mesh_face];
            for (int k = 0; k < 3; ++k)
                dev = std::max(dev, std::abs(dot(mesh.verts[fc[k]] - cen, nrm)));
        }
        rep.merged_deviation.push_back({f.id, dev});
    }

    for (const auto& [key, fs] : build_edge_map(mesh))
        if (fs.size() == 1) rep.boundary_edges++;
    return rep;
}

}  // namespace stitchfold
