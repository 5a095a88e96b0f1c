#include "sttrace/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sttrace {

TimeGrid::TimeGrid(double t_end_, double dt_) : t_end(t_end_), dt(dt_) {
    if (!(t_end > 0.0) || !(dt > 0.0))
        throw ConfigError("t_end and dt must be positive");
    const double ratio = t_end / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio))
        throw ConfigError("t_end/dt must be integral (got " + std::to_string(ratio) + ")");
    n_slabs = static_cast<int>(n);
}

double TetMesh::tet_volume(int tet) const {
    const auto& v = tets[tet];
    const Vec3& p0 = vertices[v[0]];
    Mat3 m;
    m.col(0) = vertices[v[1]] - p0;
    m.col(1) = vertices[v[2]] - p0;
    m.col(2) = vertices[v[3]] - p0;
    return std::abs(m.determinant()) / 6.0;
}

std::array<double, 4> TetMesh::barycentric(int tet, const Vec3& x) const {
    const auto& v = tets[tet];
    const Vec3& p0 = vertices[v[0]];
    Mat3 m;
    m.col(0) = vertices[v[1]] - p0;
    m.col(1) = vertices[v[2]] - p0;
    m.col(2) = vertices[v[3]] - p0;
    Vec3 lam = m.partialPivLu().solve(x - p0);
    return {1.0 - lam[0] - lam[1] - lam[2], lam[0], lam[1], lam[2]};
}

std::array<Vec3, 4> TetMesh::barycentric_gradients(int tet) const {
    const auto& v = tets[tet];
    const Vec3& p0 = vertices[v[0]];
    Mat3 m;
    m.col(0) = vertices[v[1]] - p0;
    m.col(1) = vertices[v[2]] - p0;
    m.col(2) = vertices[v[3]] - p0;
    Mat3 inv = m.inverse();  // rows are grad(lam_1..3)
    std::array<Vec3, 4> g;
    g[1] = inv.row(0);
    g[2] = inv.row(1);
    g[3] = inv.row(2);
    g[0] = -(g[1] + g[2] + g[3]);
    return g;
}

TetMesh build_box_mesh(const BoxDomain& box, double h) {
    if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
    TetMesh mesh;
    mesh.box = box;
    mesh.h = h;
    for (int a = 0; a < 3; ++a) {
        const double extent = box.hi[a] - box.lo[a];
        if (!(extent > 0.0))
            throw ConfigError(std::string("box has non-positive extent along axis ") +
                              char('x' + a));
        const double ratio = extent / h;
        const double n = std::round(ratio);
        if (n < 1.0 || std::abs(ratio - n) > 1e-12 * std::max(1.0, ratio))
            throw ConfigError(std::string("box extent along axis ") + char('x' + a) +
                              " is not an integer multiple of h");
        mesh.cells[a] = static_cast<int>(n);
    }

    const int sx = mesh.cells[0] + 1, sy = mesh.cells[1] + 1, sz = mesh.cells[2] + 1;
    mesh.vertices.reserve(static_cast<std::size_t>(sx) * sy * sz);
    for (int iz = 0; iz < sz; ++iz)
        for (int iy = 0; iy < sy; ++iy)
            for (int ix = 0; ix < sx; ++ix)
                mesh.vertices.emplace_back(box.lo[0] + ix * h, box.lo[1] + iy * h,
                                           box.lo[2] + iz * h);

    // Six path tets per cell, one per axis permutation, in a fixed order.
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    mesh.tets.reserve(static_cast<std::size_t>(mesh.cells[0]) * mesh.cells[1] *
                      mesh.cells[2] * 6);
    for (int iz = 0; iz < mesh.cells[2]; ++iz)
        for (int iy = 0; iy < mesh.cells[1]; ++iy)
            for (int ix = 0; ix < mesh.cells[0]; ++ix)
                for (const auto& p : perms) {
                    std::array<int, 3> c{ix, iy, iz};
                    std::array<std::int32_t, 4> t;
                    t[0] = mesh.vertex_index(c[0], c[1], c[2]);
                    for (int k = 0; k < 3; ++k) {
                        ++c[p[k]];
                        t[k + 1] = mesh.vertex_index(c[0], c[1], c[2]);
                    }
                    // Path vertices have strictly increasing lattice index.
                    mesh.tets.push_back(t);
                }
    return mesh;
}

namespace {

bool tet_contains(const TetMesh& mesh, int tet, const Vec3& x, LocateResult& out) {
    auto lam = mesh.barycentric(tet, x);
    constexpr double tol = 1e-12;
    for (double l : lam)
        if (l < -tol || l > 1.0 + tol) return false;
    out.tet = tet;
    out.bary = lam;
    return true;
}

}  // namespace

LocateResult locate_point(const TetMesh& mesh, const Vec3& x) {
    for (int a = 0; a < 3; ++a)
        if (x[a] < mesh.box.lo[a] - 1e-12 || x[a] > mesh.box.hi[a] + 1e-12)
            throw OutOfDomainError("point outside the background box");

    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) {
        int i = static_cast<int>(std::floor((x[a] - mesh.box.lo[a]) / mesh.h));
        c[a] = std::clamp(i, 0, mesh.cells[a] - 1);
    }
    LocateResult res;
    const int cell = c[0] + mesh.cells[0] * (c[1] + mesh.cells[1] * c[2]);
    for (int t = cell * 6; t < cell * 6 + 6; ++t)
        if (tet_contains(mesh, t, x, res)) return res;

    // Roundoff can push a point on a cell face into the neighboring cell; scan
    // the 3x3x3 neighborhood in tet-index order.
    std::vector<int> cand;
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (!dx && !dy && !dz) continue;
                const int ix = c[0] + dx, iy = c[1] + dy, iz = c[2] + dz;
                if (ix < 0 || iy < 0 || iz < 0 || ix >= mesh.cells[0] ||
                    iy >= mesh.cells[1] || iz >= mesh.cells[2])
                    continue;
                cand.push_back(ix + mesh.cells[0] * (iy + mesh.cells[1] * iz));
            }
    std::sort(cand.begin(), cand.end());
    for (int cc : cand)
        for (int t = cc * 6; t < cc * 6 + 6; ++t)
            if (tet_contains(mesh, t, x, res)) return res;

    throw InternalError("locate_point failed for a point inside the box");
}

}  // namespace sttrace
