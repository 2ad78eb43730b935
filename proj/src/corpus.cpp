#include "stitchfold/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <functional>

#include "stitchfold/errors.hpp"

namespace stitchfold {
namespace {

// Height-field grid: nx*ny vertices, consistent diagonals. Edges never fall
// below the grid pitch, so pitch >= 8.4 keeps every model legal.
TriangleMesh grid_surface(int nx, int ny, double dx, double dy,
                          const std::function<double(double, double)>& zf) {
    TriangleMesh m;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double x = i * dx, y = j * dy;
            m.verts.push_back({x, y, zf(x, y)});
        }
    auto at = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    return m;
}

// Generic parametric patch for curved sheets (cylinder sectors, torus patch).
TriangleMesh param_patch(int nu, int nv, const std::function<Vec3(double, double)>& f) {
    TriangleMesh m;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i)
            m.verts.push_back(f(i / double(nu - 1), j / double(nv - 1)));
    auto at = [nu](int i, int j) { return j * nu + i; };
    for (int j = 0; j + 1 < nv; ++j)
        for (int i = 0; i + 1 < nu; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    return m;
}

TriangleMesh hemisphere() {
    // Spherical cap to 70 degrees colatitude: apex fan plus three ring bands.
    double R = 45;
    int sectors = 8, rings = 4;
    double dth = (70.0 * M_PI / 180.0) / rings;
    TriangleMesh m;
    m.verts.push_back({0, 0, R});
    for (int r = 1; r <= rings; ++r)
        for (int s = 0; s < sectors; ++s) {
            double th = r * dth, ph = 2 * M_PI * s / sectors + (r % 2 ? M_PI / sectors : 0);
            m.verts.push_back({R * std::sin(th) * std::cos(ph), R * std::sin(th) * std::sin(ph),
                               R * std::cos(th)});
        }
    auto at = [&](int r, int s) { return 1 + (r - 1) * sectors + (s % sectors); };
    for (int s = 0; s < sectors; ++s) m.faces.push_back({0, at(1, s), at(1, s + 1)});
    for (int r = 1; r < rings; ++r)
        for (int s = 0; s < sectors; ++s) {
            // rings are staggered by half a sector; stitch them as a strip
            if (r % 2) {
                m.faces.push_back({at(r, s), at(r + 1, s), at(r + 1, s + 1)});
                m.faces.push_back({at(r, s), at(r + 1, s + 1), at(r, s + 1)});
            } else {
                m.faces.push_back({at(r, s), at(r + 1, s), at(r, s + 1)});
                m.faces.push_back({at(r + 1, s), at(r + 1, s + 1), at(r, s + 1)});
            }
        }
    return m;
}

TriangleMesh saddle() {
    return grid_surface(5, 5, 12, 12, [](double x, double y) {
        double u = x - 24, v = y - 24;
        return (u * u - v * v) / 80.0;
    });
}

TriangleMesh miura() {
    // Folded parallelogram cells: shear alternates by column, height by row.
    TriangleMesh m;
    int nx = 5, ny = 5;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.verts.push_back({i * 12.0, j * 12.0 + (i % 2 ? 4.0 : 0.0), (j % 2 ? 5.0 : 0.0)});
    auto at = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    return m;
}

TriangleMesh waterbomb() {
    // Checkerboard relief: every other vertex lifted, pyramid cells all over.
    return grid_surface(5, 5, 12, 12, [](double x, double y) {
        int i = (int)std::lround(x / 12), j = (int)std::lround(y / 12);
        return ((i + j) % 2) ? 4.0 : 0.0;
    });
}

TriangleMesh yoshimura() {
    // Diamond-buckled cylinder sector: staggered rows, offset rows dented in.
    double R = 40, dent = 5, rowh = 14, span = 150.0 * M_PI / 180.0;
    int cols = 6, rows = 5;
    TriangleMesh m;
    double dth = span / (cols - 1);
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            double th = (i + (j % 2 ? 0.5 : 0.0)) * dth;
            double r = (j % 2) ? R - dent : R;
            m.verts.push_back({r * std::cos(th), r * std::sin(th), j * rowh});
        }
    auto at = [cols](int i, int j) { return j * cols + i; };
    for (int j = 0; j + 1 < rows; ++j)
        for (int i = 0; i + 1 < cols; ++i) {
            if (j % 2) {
                m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
                m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
            } else {
                m.faces.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
                m.faces.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
            }
        }
    return m;
}

TriangleMesh hyperboloid() {
    // Waisted ruled sector, radius 30 at the waist flaring to ~37.
    return param_patch(6, 5, [](double u, double v) {
        double th = (u - 0.5) * 160.0 * M_PI / 180.0;
        double z = (v - 0.5) * 60.0;
        double r = std::sqrt(30.0 * 30.0 + 0.49 * z * z);
        return Vec3{r * std::cos(th), r * std::sin(th), z};
    });
}

TriangleMesh mountain() {
    return grid_surface(6, 6, 11, 11, [](double x, double y) {
        double u = x - 27.5, v = y - 27.5;
        return 10.0 * std::exp(-(u * u + v * v) / (2 * 18.0 * 18.0));
    });
}

TriangleMesh two_bumps() {
    return grid_surface(7, 5, 11, 11, [](double x, double y) {
        double v = y - 22;
        double a = x - 16.5, b = x - 49.5;
        double s2 = 2 * 13.0 * 13.0;
        return 8.0 * (std::exp(-(a * a + v * v) / s2) + std::exp(-(b * b + v * v) / s2));
    });
}

TriangleMesh tessellation() {
    // Triangular grid with a sparse lifted-vertex relief.
    TriangleMesh m;
    int cols = 6, rows = 5;
    double dx = 12, dy = 10.392;
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            double x = i * dx + (j % 2 ? dx / 2 : 0);
            double z = ((i + 2 * j) % 3 == 0) ? 3.5 : 0.0;
            m.verts.push_back({x, j * dy, z});
        }
    auto at = [cols](int i, int j) { return j * cols + i; };
    for (int j = 0; j + 1 < rows; ++j)
        for (int i = 0; i + 1 < cols; ++i) {
            if (j % 2) {
                m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
                m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
            } else {
                m.faces.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
                m.faces.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
            }
        }
    return m;
}

TriangleMesh cut_torus() {
    // Torus patch open in both directions: the two canonical cuts are baked
    // into the parameterization, so the sheet is already a disk.
    double R = 38, r = 13;
    return param_patch(8, 6, [R, r](double u, double v) {
        double a = u * 1.2 * M_PI, b = v * 1.5 * M_PI;
        return Vec3{(R + r * std::cos(b)) * std::cos(a), (R + r * std::cos(b)) * std::sin(a),
                    r * std::sin(b)};
    });
}

}  // namespace

std::vector<std::string> corpus_names() {
    return {"hemisphere", "saddle",   "miura",     "waterbomb",    "yoshimura",
            "hyperboloid", "mountain", "two_bumps", "tessellation", "cut_torus"};
}

TriangleMesh corpus_model(const std::string& name) {
    if (name == "hemisphere") return hemisphere();
    if (name == "saddle") return saddle();
    if (name == "miura") return miura();
    if (name == "waterbomb") return waterbomb();
    if (name == "yoshimura") return yoshimura();
    if (name == "hyperboloid") return hyperboloid();
    if (name == "mountain") return mountain();
    if (name == "two_bumps") return two_bumps();
    if (name == "tessellation") return tessellation();
    if (name == "cut_torus") return cut_torus();
    throw validation_error("UnknownModel", "no built-in model named '" + name + "'");
}

void write_corpus(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& name : corpus_names())
        save_obj_file(corpus_model(name), dir + "/" + name + ".obj");
}

TriangleMesh spike_mesh() {
    // Fan around an apex whose incident angles sum to ~4 turns: the ring
    // zigzags hard in z, so each wedge is wide open at the center.
    TriangleMesh m;
    int n = 12;
    m.verts.push_back({0, 0, 0});
    for (int k = 0; k < n; ++k) {
        double th = 2 * M_PI * k / n;
        m.verts.push_back({10 * std::cos(th), 10 * std::sin(th), (k % 2) ? 15.0 : -15.0});
    }
    for (int k = 0; k < n; ++k) m.faces.push_back({0, k + 1, (k + 1) % n + 1});
    return m;
}

TriangleMesh closed_sphere() {
    double t = (1 + std::sqrt(5.0)) / 2, s = 20.0;
    TriangleMesh m;
    m.verts = {{-s, t * s, 0}, {s, t * s, 0}, {-s, -t * s, 0}, {s, -t * s, 0},
               {0, -s, t * s}, {0, s, t * s}, {0, -s, -t * s}, {0, s, -t * s},
               {t * s, 0, -s}, {t * s, 0, s}, {-t * s, 0, -s}, {-t * s, 0, s}};
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return m;
}

TriangleMesh closed_torus() {
    double R = 40, r = 14;
    int nu = 8, nv = 6;
    TriangleMesh m;
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            double a = 2 * M_PI * i / nu, b = 2 * M_PI * j / nv;
            m.verts.push_back({(R + r * std::cos(b)) * std::cos(a),
                               (R + r * std::cos(b)) * std::sin(a), r * std::sin(b)});
        }
    auto at = [&](int i, int j) { return (j % nv) * nu + (i % nu); };
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            m.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            m.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    return m;
}

}  // namespace stitchfold
