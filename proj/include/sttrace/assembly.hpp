#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "sttrace/geometry.hpp"

namespace sttrace {

/// Trace unknowns of one slab: one dof per (active node, layer). Active nodes
/// are the vertices of coarse tets owning at least one surface element; the
/// two layers carry the endpoint-in-time basis theta0 = (t1-t)/dt and
/// theta1 = (t-t0)/dt. Dof order is (node rank, layer), nodes ascending.
struct TraceDofMap {
    int slab = 0;
    double t0 = 0.0, t1 = 0.0;
    std::vector<std::int32_t> active_nodes;  // sorted ascending
    std::vector<std::int32_t> node_rank;     // mesh vertex -> rank, -1 inactive

    int n_dofs() const { return 2 * static_cast<int>(active_nodes.size()); }
    int dof(int node, int layer) const {
        const int r = node_rank[node];
        return r < 0 ? -1 : 2 * r + layer;
    }
};

TraceDofMap build_dof_map(const TetMesh& mesh, const SlabReconstruction& R);

struct SlabSystem {
    TraceDofMap dofs;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
};

/// Value, spatial gradient and time derivative of one space-time bilinear
/// basis function lam_node(x) * theta_layer(t) of the prism tet x [t0,t1].
struct BasisEval {
    double value;
    Vec3 grad;
    double dt;
};

/// Evaluates basis (local_node, layer) at (x,t); the point must lie inside the
/// prism (barycentric tolerance 1e-10), otherwise InternalError.
BasisEval basis_eval(const TetMesh& mesh, int tet, double t0, double t1, int local_node,
                     int layer, const Vec3& x, double t);

/// One trace solution: coefficients for every (active node, layer) of a slab.
/// As a bulk function it is extended by zero coefficients outside the active
/// set, which keeps it continuous in space, so evaluation through any
/// containing tet gives the same value.
struct SlabSolution {
    TraceDofMap dofs;
    Eigen::VectorXd coeff;

    double coeff_of(int node, int layer) const {
        const int d = dofs.dof(node, layer);
        return d < 0 ? 0.0 : coeff[d];
    }
    /// Evaluation inside a known containing tet.
    BasisEval eval_in_tet(const TetMesh& mesh, int tet, const Vec3& x, double t) const;
    double value_in_tet(const TetMesh& mesh, int tet, const Vec3& x, double t) const;
    /// Evaluation through locate_point.
    double value(const TetMesh& mesh, const Vec3& x, double t) const;
};

/// Continuous P1 field from nodal values, prepared over the nodes of a given
/// tet set; other nodes count as zero.
class NodalField {
public:
    NodalField(const TetMesh* mesh, const std::vector<std::int32_t>& tets,
               const std::function<double(const Vec3&)>& node_value);
    double node_value(int node) const;
    double value_in_tet(int tet, const Vec3& x) const;
    double value(const Vec3& x) const;
    Vec3 grad_in_tet(int tet, const Vec3& x) const;

private:
    const TetMesh* mesh_;
    std::vector<std::int32_t> rank_;  // node -> index into values_, -1 if unset
    std::vector<double> values_;
};

/// u(., t0) seen by the slab being assembled: the previous slab's trace (or
/// the interpolated initial data), evaluated inside a containing tet.
using PrevEvaluator = std::function<double(int tet, const Vec3& x)>;

/// Assembles the slab system
///   A[i][j] = sum_q w_q beta [ (dt chi_j + w.grad chi_j) chi_i
///                              + nu (P grad chi_j).(P grad chi_i)
///                              + alpha chi_j chi_i ]
///             + sum_cross w_q chi_j chi_i            (at t0, bottom layer)
///   b[i]    = sum_q w_q beta f chi_i + sum_cross w_q prev chi_i
/// over the slab reconstruction and its lower cross section.
SlabSystem assemble_slab(const TetMesh& mesh, const ProblemDefinition& p,
                         const SlabReconstruction& R, const CrossSection& lower,
                         const PrevEvaluator& prev);

/// The cross-section mass pairing alone (the jump term's matrix block).
Eigen::SparseMatrix<double> cross_section_mass(const TetMesh& mesh, const CrossSection& cs,
                                               const TraceDofMap& dofs);

/// Discrete stability functional: energy = <du,u>_b + a(u,u) + d(u,u) versus
/// the coercivity bound min{1,c0} (nu |u|_H^2 + 1/2 |u_N|^2 + 1/2 sum |[u]|^2),
/// with [u]^0 = u_+^0. Requires f = 0 and alpha - div_gamma_w/2 >= c0 > 0 at
/// every surface quadrature point (ConfigError otherwise).
struct EnergyReport {
    double energy = 0.0;
    double lower_bound = 0.0;
    double margin = 0.0;  // energy - lower_bound
};
EnergyReport energy_check(const SlabGeometry& geo, const ProblemDefinition& p,
                          const std::vector<SlabSolution>& sols, double c0);

}  // namespace sttrace
