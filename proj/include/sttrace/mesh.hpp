#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "sttrace/errors.hpp"

namespace sttrace {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;

/// Axis-aligned background box.
struct BoxDomain {
    Vec3 lo{-2.0, -2.0, -2.0};
    Vec3 hi{2.0, 2.0, 2.0};
};

/// Uniform time slabbing of [0, t_end] into n_slabs slabs of length dt.
/// Slab n (1-based) covers [t(n-1), t(n)] with t(n) = n*dt.
struct TimeGrid {
    double t_end = 1.0;
    double dt = 0.25;
    int n_slabs = 4;

    TimeGrid() = default;
    TimeGrid(double t_end_, double dt_);
    double t(int n) const { return n * dt; }
};

/// Conforming tetrahedral mesh of a box: every grid cell is split into the six
/// path tetrahedra through its diagonal (one per axis permutation), which is
/// translation invariant across cells and nests under h -> h/2 refinement.
/// Tet vertex indices are stored sorted ascending.
struct TetMesh {
    BoxDomain box;
    double h = 1.0;
    std::array<int, 3> cells{};                    // cells per axis
    std::vector<Vec3> vertices;
    std::vector<std::array<std::int32_t, 4>> tets;

    int vertex_index(int ix, int iy, int iz) const {
        return ix + (cells[0] + 1) * (iy + (cells[1] + 1) * iz);
    }
    int cell_of_tet(int tet) const { return tet / 6; }
    std::array<int, 3> cell_coords(int cell) const {
        const int nx = cells[0], ny = cells[1];
        return {cell % nx, (cell / nx) % ny, cell / (nx * ny)};
    }
    bool boundary_cell(int cell) const {
        auto c = cell_coords(cell);
        for (int a = 0; a < 3; ++a)
            if (c[a] == 0 || c[a] == cells[a] - 1) return true;
        return false;
    }

    double tet_volume(int tet) const;
    /// Barycentric coordinates of x in tet; lam[0..3] sums to 1.
    std::array<double, 4> barycentric(int tet, const Vec3& x) const;
    /// Gradients of the four barycentric coordinate functions (constant per tet).
    std::array<Vec3, 4> barycentric_gradients(int tet) const;
};

/// Builds the Kuhn-type box mesh. The box extent must be an integer multiple
/// of h along every axis (to 1e-12 relative); violations name the axis.
TetMesh build_box_mesh(const BoxDomain& box, double h);

struct LocateResult {
    int tet = -1;
    std::array<double, 4> bary{};
};

/// Finds a tet containing x (grid cell lookup + scan of its six tets, then the
/// neighbor cells for points within roundoff of a cell boundary). Barycentric
/// coordinates are accepted down to -1e-12; containment ties go to the lowest
/// tet index scanned. Points beyond 1e-12 outside the box raise OutOfDomainError.
LocateResult locate_point(const TetMesh& mesh, const Vec3& x);

}  // namespace sttrace
