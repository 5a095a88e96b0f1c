#include "sttrace/problems.hpp"

#include <cmath>
#include <map>

namespace sttrace {

SurfaceCoefficients surface_coefficients(const ProblemDefinition& p, const Vec3& x,
                                         double t, const Vec3& n) {
    if (std::abs(n.norm() - 1.0) > 1e-6)
        throw InternalError("surface_coefficients needs a unit normal");
    SurfaceCoefficients c;
    c.n = n;
    const Mat3 J = p.velocity_jacobian(x, t);
    c.div_gamma_w = J.trace() - n.dot(J * n);
    c.alpha = p.alpha_explicit ? p.alpha_explicit(x, t) : c.div_gamma_w;
    const double wn = p.velocity(x, t).dot(n);
    c.beta = 1.0 / std::sqrt(1.0 + wn * wn);
    return c;
}

namespace {

Vec3 radial_unit(const Vec3& x) {
    const double r = x.norm();
    if (r < 1e-10) throw DomainError("radial field evaluated at the origin");
    return x / r;
}

/// Jacobian of a purely radial field s(t) * x/|x|.
Mat3 radial_jacobian(const Vec3& x, double s) {
    const double r = x.norm();
    if (r < 1e-10) throw DomainError("radial field evaluated at the origin");
    const Vec3 e = x / r;
    return (s / r) * (Mat3::Identity() - e * e.transpose());
}

ProblemDefinition make_shrinking_sphere() {
    ProblemDefinition p;
    p.name = "shrinking_sphere";
    p.nu = 1.0;
    p.level_set = [](const Vec3& x, double t) { return x.squaredNorm() - 2.25 * std::exp(-t); };
    p.velocity = [](const Vec3& x, double t) {
        return Vec3(-0.75 * std::exp(-0.5 * t) * radial_unit(x));
    };
    p.velocity_jacobian = [](const Vec3& x, double t) {
        return radial_jacobian(x, -0.75 * std::exp(-0.5 * t));
    };
    p.source = [](const Vec3& x, double t, const Vec3&) {
        return (-1.5 * std::exp(t) + (16.0 / 3.0) * std::exp(2.0 * t)) * x[0] * x[1] * x[2];
    };
    p.exact_solution = [](const Vec3& x, double t) {
        return (1.0 + x[0] * x[1] * x[2]) * std::exp(t);
    };
    p.initial_value = [](const Vec3& x) { return 1.0 + x[0] * x[1] * x[2]; };
    p.closest_point = [](const Vec3& x, double t) {
        return Vec3(1.5 * std::exp(-0.5 * t) * radial_unit(x));
    };
    return p;
}

ProblemDefinition make_shrinking_sphere_exp() {
    ProblemDefinition p = make_shrinking_sphere();
    p.name = "shrinking_sphere_exp";
    p.source = [](const Vec3&, double, const Vec3&) { return 0.0; };
    p.exact_solution = [](const Vec3&, double t) { return std::exp(t); };
    p.initial_value = [](const Vec3&) { return 1.0; };
    return p;
}

ProblemDefinition make_dziuk_moving() {
    ProblemDefinition p;
    p.name = "dziuk_moving";
    p.nu = 1.0;
    p.level_set = [](const Vec3& x, double t) {
        const double y1 = x[0] * std::exp(-0.1 * std::sin(t));
        const double y2 = x[1] * std::exp(-0.2 * (1.0 - std::cos(t)));
        const double y3 = x[2] * std::exp(-0.2 * std::sin(t));
        const double a = y1 - y3 * y3;
        return a * a + y2 * y2 + y3 * y3 - 1.0;
    };
    p.velocity = [](const Vec3& x, double t) {
        return Vec3(0.1 * x[0] * std::cos(t), 0.2 * x[1] * std::sin(t),
                    0.2 * x[2] * std::cos(t));
    };
    p.velocity_jacobian = [](const Vec3&, double t) {
        Mat3 J = Mat3::Zero();
        J(0, 0) = 0.1 * std::cos(t);
        J(1, 1) = 0.2 * std::sin(t);
        J(2, 2) = 0.2 * std::cos(t);
        return J;
    };
    p.source = [](const Vec3&, double, const Vec3&) { return 0.0; };
    p.initial_value = [](const Vec3& x) { return 1.0 + x[0] * x[1] * x[2]; };
    return p;
}

ProblemDefinition make_static_sphere() {
    ProblemDefinition p;
    p.name = "static_sphere";
    p.nu = 1.0;
    p.level_set = [](const Vec3& x, double) { return x.squaredNorm() - 1.0; };
    p.velocity = [](const Vec3&, double) { return Vec3(Vec3::Zero()); };
    p.velocity_jacobian = [](const Vec3&, double) { return Mat3(Mat3::Zero()); };
    p.source = [](const Vec3&, double, const Vec3&) { return 0.0; };
    p.exact_solution = [](const Vec3&, double) { return 1.0; };
    p.initial_value = [](const Vec3&) { return 1.0; };
    p.closest_point = [](const Vec3& x, double) { return Vec3(radial_unit(x)); };
    return p;
}

ProblemDefinition make_expanding_sphere() {
    ProblemDefinition p;
    p.name = "expanding_sphere";
    p.nu = 1.0;
    p.level_set = [](const Vec3& x, double t) { return x.squaredNorm() - std::exp(t); };
    p.velocity = [](const Vec3& x, double t) {
        return Vec3(0.5 * std::exp(0.5 * t) * radial_unit(x));
    };
    p.velocity_jacobian = [](const Vec3& x, double t) {
        return radial_jacobian(x, 0.5 * std::exp(0.5 * t));
    };
    p.source = [](const Vec3&, double, const Vec3&) { return 0.0; };
    p.initial_value = [](const Vec3& x) { return 1.0 + x[0] * x[1] * x[2]; };
    p.closest_point = [](const Vec3& x, double t) {
        return Vec3(std::exp(0.5 * t) * radial_unit(x));
    };
    return p;
}

const std::map<std::string, ProblemDefinition>& registry() {
    static const std::map<std::string, ProblemDefinition> reg = [] {
        std::map<std::string, ProblemDefinition> r;
        for (auto&& p : {make_shrinking_sphere(), make_shrinking_sphere_exp(),
                         make_dziuk_moving(), make_static_sphere(), make_expanding_sphere()})
            r.emplace(p.name, std::move(p));
        return r;
    }();
    return reg;
}

}  // namespace

const ProblemDefinition& problem_by_name(const std::string& name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown problem: " + name);
    return it->second;
}

std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const auto& [name, p] : registry()) names.push_back(name);
    return names;
}

}  // namespace sttrace
