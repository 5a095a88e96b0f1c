#include "sttrace/diagnostics.hpp"

#include <cmath>

namespace sttrace {

namespace {

void validate(const RunState& s) {
    if (!s.mesh || !s.geo || !s.problem || !s.initial || !s.slabs)
        throw InternalError("incomplete run state");
    if (static_cast<int>(s.slabs->size()) != s.grid.n_slabs)
        throw InternalError("run state slab count does not match the time grid");
}

Vec3 triangle_unit_normal(const CrossSectionElement& ce) {
    const Vec3 n = (ce.v[1] - ce.v[0]).cross(ce.v[2] - ce.v[0]);
    return n / n.norm();
}

Vec3 exact_fd_gradient(const ProblemDefinition& p, const Vec3& x, double t, double step) {
    Vec3 g;
    for (int a = 0; a < 3; ++a) {
        Vec3 xp = x, xm = x;
        xp[a] += step;
        xm[a] -= step;
        g[a] = (p.extended_exact(xp, t) - p.extended_exact(xm, t)) / (2.0 * step);
    }
    return g;
}

struct SectionStats {
    double mass = 0.0;
    double err2_l2 = 0.0;
    double err2_h1 = 0.0;
};

SectionStats scan_section(const RunState& s, const CrossSection& cs, double t,
                          const std::function<BasisEval(int, const Vec3&)>& uh,
                          bool want_exact, double fd_step) {
    SectionStats st;
    for (const CrossSectionElement& ce : cs.elements) {
        const Vec3 nrm = want_exact ? triangle_unit_normal(ce) : Vec3::Zero();
        for (const QuadPoint3& q : quadrature(ce)) {
            const BasisEval e = uh(ce.parent_tet, q.x);
            st.mass += q.w * e.value;
            if (want_exact) {
                const double du = s.problem->extended_exact(q.x, t) - e.value;
                st.err2_l2 += q.w * du * du;
                Vec3 d = exact_fd_gradient(*s.problem, q.x, t, fd_step) - e.grad;
                d -= nrm * nrm.dot(d);
                st.err2_h1 += q.w * d.squaredNorm();
            }
        }
    }
    return st;
}

ErrorReport scan_all(const RunState& s, bool want_exact) {
    validate(s);
    ErrorReport rep;
    const double fd = 1e-5 * s.mesh->h;
    const int N = s.grid.n_slabs;
    double h1_acc = 0.0;

    const CrossSection cs0 = s.geo->cross_section_lower(1);
    const auto uh0 = [&](int tet, const Vec3& x) {
        return BasisEval{s.initial->value_in_tet(tet, x), s.initial->grad_in_tet(tet, x), 0.0};
    };
    const SectionStats st0 = scan_section(s, cs0, s.grid.t(0), uh0, want_exact, fd);
    rep.mass_initial = st0.mass;
    h1_acc += 0.5 * s.grid.dt * st0.err2_h1;

    double msum = 0.0;
    for (int n = 1; n <= N; ++n) {
        const CrossSection cs = s.geo->cross_section_upper(n);
        const double t = s.grid.t(n);
        const SlabSolution& u = (*s.slabs)[n - 1];
        const auto uh = [&](int tet, const Vec3& x) { return u.eval_in_tet(*s.mesh, tet, x, t); };
        const SectionStats st = scan_section(s, cs, t, uh, want_exact, fd);
        rep.mass.push_back({t, st.mass});
        msum += st.mass;
        h1_acc += (n == N ? 0.5 : 1.0) * s.grid.dt * st.err2_h1;
        if (want_exact && n == N) rep.err_l2_final = std::sqrt(st.err2_l2);
    }
    rep.mass_avg = msum / N;
    rep.mass_abs_err = std::abs(rep.mass_initial - rep.mass_avg);
    if (want_exact) rep.err_l2h1 = std::sqrt(h1_acc);
    return rep;
}

void require_exact(const RunState& s) {
    validate(s);
    if (!s.problem->has_exact())
        throw ConfigError("problem '" + s.problem->name + "' has no exact solution");
}

}  // namespace

double l2_error_final(const RunState& s) {
    require_exact(s);
    const int N = s.grid.n_slabs;
    const CrossSection cs = s.geo->cross_section_upper(N);
    const double t = s.grid.t(N);
    const SlabSolution& u = s.slabs->back();
    const auto uh = [&](int tet, const Vec3& x) { return u.eval_in_tet(*s.mesh, tet, x, t); };
    return std::sqrt(scan_section(s, cs, t, uh, true, 1e-5 * s.mesh->h).err2_l2);
}

double l2h1_error(const RunState& s) {
    require_exact(s);
    return scan_all(s, true).err_l2h1;
}

void mass_trajectory(const RunState& s, ErrorReport& out) {
    const ErrorReport r = scan_all(s, false);
    out.mass_initial = r.mass_initial;
    out.mass_avg = r.mass_avg;
    out.mass_abs_err = r.mass_abs_err;
    out.mass = r.mass;
}

std::vector<double> observed_order(const std::vector<double>& errors) {
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (errors[i] <= 0.0 || errors[i + 1] <= 0.0)
            orders.push_back(std::numeric_limits<double>::infinity());
        else
            orders.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    return orders;
}

ErrorReport compute_report(const RunState& s) {
    validate(s);
    return scan_all(s, s.problem->has_exact());
}

}  // namespace sttrace
