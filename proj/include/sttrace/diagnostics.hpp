#pragma once

#include <limits>
#include <vector>

#include "sttrace/assembly.hpp"

namespace sttrace {

/// View of one completed simulation: background mesh, slab geometry engine,
/// problem (with any viscosity override applied), interpolated initial data,
/// and the per-slab trace solutions in time order.
struct RunState {
    const TetMesh* mesh = nullptr;
    const SlabGeometry* geo = nullptr;
    const ProblemDefinition* problem = nullptr;
    TimeGrid grid{1.0, 1.0};
    const NodalField* initial = nullptr;
    const std::vector<SlabSolution>* slabs = nullptr;
};

struct MassPoint {
    double t;
    double mass;
};

struct ErrorReport {
    double err_l2_final = std::numeric_limits<double>::quiet_NaN();
    double err_l2h1 = std::numeric_limits<double>::quiet_NaN();
    double mass_initial = 0.0;
    double mass_avg = 0.0;
    double mass_abs_err = 0.0;
    std::vector<MassPoint> mass;  // M_h(t_n), n = 1..N
};

/// L2 error of the final trace on the reconstructed surface at t_end against
/// the extended exact solution. ConfigError without an exact solution.
double l2_error_final(const RunState& s);

/// Tangential-gradient error sqrt( sum_n w_n |P grad(u_e - u_h)|^2_{Gamma_h(t_n)} )
/// with trapezoidal time weights (dt/2 at both ends); the t_0 term uses the
/// interpolated initial data, the exact gradient comes from central finite
/// differences projected by the cross-section triangle's tangent plane.
/// ConfigError without an exact solution.
double l2h1_error(const RunState& s);

/// Surface integrals of the solution: M(0) integrates the interpolated initial
/// data over the initial cross section, M_h(t_n) the slab traces at their
/// upper faces; mass_abs_err = |M(0) - avg_n M_h(t_n)|.
void mass_trajectory(const RunState& s, ErrorReport& out);

/// log2(e_i / e_{i+1}) for a halving refinement series; a nonpositive entry
/// anywhere in a pair yields +inf.
std::vector<double> observed_order(const std::vector<double>& errors);

/// Full report in one sweep over the cross sections. Error fields stay NaN
/// when the problem has no exact solution; mass fields are always filled.
ErrorReport compute_report(const RunState& s);

}  // namespace sttrace
