#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sttrace/mesh.hpp"

namespace sttrace {

/// Pointwise coefficients of the surface PDE at (x,t) for a given unit normal.
struct SurfaceCoefficients {
    Vec3 n;              // the normal the values were computed with
    double div_gamma_w;  // tangential divergence tr(Dw) - n.(Dw n)
    double alpha;        // reaction coefficient used by the bilinear form
    double beta;         // (1 + (w.n)^2)^{-1/2}, space-time measure factor
};

/// A moving-surface advection-diffusion problem
///     du/dt + (div_G w) u - nu Lap_G u = f    on Gamma(t),
/// described through a level-set function phi(x,t) < 0 inside Gamma(t),
/// the bulk velocity field w, and the data f, u0.
struct ProblemDefinition {
    std::string name;
    double nu = 1.0;

    std::function<double(const Vec3&, double)> level_set;
    std::function<Vec3(const Vec3&, double)> velocity;
    std::function<Mat3(const Vec3&, double)> velocity_jacobian;
    /// Source term. Receives the local discrete unit normal so manufactured
    /// sources may depend on discretely evaluated coefficients; the built-in
    /// problems ignore it.
    std::function<double(const Vec3&, double, const Vec3&)> source;
    std::function<double(const Vec3&)> initial_value;

    /// Optional: exact solution and closest-point projection (for error
    /// measurement and for extending data off the surface).
    std::function<double(const Vec3&, double)> exact_solution;
    std::function<Vec3(const Vec3&, double)> closest_point;
    /// Optional: explicit reaction coefficient; when absent, alpha is the
    /// discretely evaluated div_gamma_w.
    std::function<double(const Vec3&, double)> alpha_explicit;

    bool has_exact() const { return static_cast<bool>(exact_solution); }
    bool has_closest_point() const { return static_cast<bool>(closest_point); }

    /// Extension of the initial value off Gamma(0): through the closest-point
    /// projection when available, otherwise the raw initial_value.
    double extended_initial_value(const Vec3& x) const {
        return closest_point ? initial_value(closest_point(x, 0.0)) : initial_value(x);
    }
    /// Extension of the exact solution off Gamma(t) (constant along normals).
    double extended_exact(const Vec3& x, double t) const {
        return exact_solution(closest_point ? closest_point(x, t) : x, t);
    }
};

/// Evaluates the PDE coefficients at (x,t) with the supplied unit normal.
SurfaceCoefficients surface_coefficients(const ProblemDefinition& p, const Vec3& x,
                                         double t, const Vec3& n);

/// Built-in problems, looked up by name:
///   shrinking_sphere, shrinking_sphere_exp, dziuk_moving,
///   static_sphere, expanding_sphere.
const ProblemDefinition& problem_by_name(const std::string& name);
std::vector<std::string> problem_names();

}  // namespace sttrace
