// Acceptance checks for the headline experiments: convergence orders on the
// shrinking sphere, large-time-step stability, mass conservation on the
// deforming surface, and the structural property suite. Each criterion prints
// exactly one [PASS]/[FAIL] line; the exit code is the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sttrace/driver.hpp"

using namespace sttrace;

namespace {

std::string fmt_list(const std::vector<double>& v, const char* spec = "%.4g") {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, spec, v[i]);
        if (i) out += ", ";
        out += buf;
    }
    return out;
}

bool all_in(const std::vector<double>& v, double lo, double hi) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x >= lo && x <= hi; });
}

std::map<std::string, ErrorReport> run_cache;

const ErrorReport& cached_run(const std::string& problem, double h, double dt, double t_end) {
    std::ostringstream key;
    key << problem << '|' << h << '|' << dt << '|' << t_end;
    if (auto it = run_cache.find(key.str()); it != run_cache.end()) return it->second;
    RunConfig cfg;
    cfg.problem = problem;
    cfg.h = h;
    cfg.dt = dt;
    cfg.t_end = t_end;
    const Simulation sim(cfg);
    const ErrorReport rep = compute_report(sim.state());
    std::printf("  run %s h=%g dt=%g T=%g: err_l2=%.4g err_l2h1=%.4g mass_err=%.4g\n",
                problem.c_str(), h, dt, t_end, rep.err_l2_final, rep.err_l2h1,
                rep.mass_abs_err);
    std::fflush(stdout);
    return run_cache.emplace(key.str(), rep).first->second;
}

struct CriterionResult {
    bool ok;
    std::string detail;
};

CriterionResult c1_l2_space() {
    std::vector<double> errs;
    for (double h : {0.5, 0.25, 0.125})
        errs.push_back(cached_run("shrinking_sphere", h, 1.0 / 16.0, 1.0).err_l2_final);
    const auto orders = observed_order(errs);
    return {all_in(orders, 1.7, 2.5),
            "L2(t_N) errors " + fmt_list(errs) + "; orders " + fmt_list(orders) +
                " (required [1.7, 2.5])"};
}

CriterionResult c2_l2_time() {
    std::vector<double> errs;
    for (double dt : {1.0, 0.5, 0.25})
        errs.push_back(cached_run("shrinking_sphere", 0.125, dt, 1.0).err_l2_final);
    const auto orders = observed_order(errs);
    return {all_in(orders, 1.6, 2.5),
            "L2(t_N) errors " + fmt_list(errs) + "; orders " + fmt_list(orders) +
                " (required [1.6, 2.5])"};
}

CriterionResult c3_h1_space() {
    std::vector<double> errs;
    for (double h : {0.5, 0.25, 0.125})
        errs.push_back(cached_run("shrinking_sphere", h, 1.0 / 16.0, 1.0).err_l2h1);
    const auto orders = observed_order(errs);
    return {all_in(orders, 0.8, 1.4),
            "L2(H1) errors " + fmt_list(errs) + "; orders " + fmt_list(orders) +
                " (required [0.8, 1.4])"};
}

CriterionResult c4_h1_time_exp() {
    std::vector<double> errs;
    for (double dt : {1.0, 0.5, 0.25})
        errs.push_back(cached_run("shrinking_sphere_exp", 0.125, dt, 1.0).err_l2h1);
    const auto orders = observed_order(errs);
    return {all_in(orders, 0.8, 1.4),
            "L2(H1) errors " + fmt_list(errs) + "; orders " + fmt_list(orders) +
                " (required [0.8, 1.4])"};
}

CriterionResult c5_large_dt() {
    const ErrorReport rep = cached_run("shrinking_sphere", 0.125, 1.0, 1.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, "single slab over [0,1]: err_l2=%.4g (required < 1)",
                  rep.err_l2_final);
    return {rep.err_l2_final < 1.0, buf};
}

CriterionResult c6_mass() {
    bool ok = true;
    std::ostringstream detail;

    // Conserved exact mass: M(0) = |Gamma(0)| for the unit initial datum.
    const double m_exact = 13.608349674;

    std::vector<double> h_errs, h_m0;
    for (double h : {0.5, 0.25, 0.125}) {
        const ErrorReport rep = cached_run("dziuk_moving", h, 0.1, 8.0);
        h_errs.push_back(std::abs(m_exact - rep.mass_avg));
        h_m0.push_back(rep.mass_initial);
    }
    std::vector<double> hr;
    for (std::size_t i = 0; i + 1 < h_errs.size(); ++i) hr.push_back(h_errs[i] / h_errs[i + 1]);
    ok = ok && all_in(hr, 2.5, 6.0);
    detail << "h-series errors " << fmt_list(h_errs) << ", ratios " << fmt_list(hr);

    const std::vector<double> h_ref = {0.2302, 0.0562, 0.0129};
    for (std::size_t i = 0; i < h_errs.size(); ++i) {
        const double f = h_errs[i] / h_ref[i];
        if (f < 0.1 || f > 10.0) ok = false;
    }

    std::vector<double> dt_errs;
    for (double dt : {0.8, 0.4, 0.2, 0.1})
        dt_errs.push_back(std::abs(m_exact - cached_run("dziuk_moving", 0.125, dt, 8.0).mass_avg));
    std::vector<double> dtr;
    for (std::size_t i = 0; i + 1 < dt_errs.size(); ++i)
        dtr.push_back(dt_errs[i] / dt_errs[i + 1]);
    ok = ok && all_in(dtr, 2.5, 6.0);
    detail << "; dt-series errors " << fmt_list(dt_errs) << ", ratios " << fmt_list(dtr);

    const std::vector<double> dt_ref = {0.4973, 0.1126, 0.0208, 0.0052};
    for (std::size_t i = 0; i < dt_errs.size(); ++i) {
        const double f = dt_errs[i] / dt_ref[i];
        if (f < 0.1 || f > 10.0) ok = false;
    }

    std::vector<double> m0_errs;
    for (double m : h_m0) m0_errs.push_back(std::abs(m - m_exact));
    const auto m0_orders = observed_order(m0_errs);
    ok = ok && all_in(m0_orders, 1.3, 2.7);
    detail << "; M(0) orders " << fmt_list(m0_orders);
    return {ok, detail.str()};
}

// ---- property suite ----

bool prism_partition_exact(std::string& why) {
    std::mt19937 rng(4711);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        Prism4 pr;
        Eigen::Matrix3d edges;
        do {
            for (auto& v : pr.verts)
                for (int c = 0; c < 3; ++c) v[c] = u(rng);
            for (int i = 0; i < 3; ++i) edges.col(i) = pr.verts[i + 1] - pr.verts[0];
        } while (std::abs(edges.determinant()) < 1e-3);
        pr.t0 = 0.25;
        pr.t1 = 0.25 + 0.5 * (trial + 1) / 30.0;
        const double vol3 = std::abs(edges.determinant()) / 6.0;
        double sum = 0.0;
        for (const Pentatope& P : subdivide_prism(pr)) sum += P.volume();
        const double want = vol3 * (pr.t1 - pr.t0);
        if (std::abs(sum - want) > 1e-12 * want) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "trial %d: sum %.17g vs %.17g", trial, sum, want);
            why = buf;
            return false;
        }
    }
    why = "30 random prisms, relative defect <= 1e-12";
    return true;
}

bool slab_watertight(const SlabReconstruction& R, std::string& why) {
    std::map<std::array<std::int64_t, 3>, std::pair<int, bool>> facets;
    for (std::size_t e = 0; e < R.elements.size(); ++e) {
        const SurfaceElement& el = R.elements[e];
        const auto& keys = R.vertex_keys[e];
        for (int omit = 0; omit < 4; ++omit) {
            std::array<std::int64_t, 3> tri;
            bool at_t0 = true, at_t1 = true;
            int c = 0;
            for (int i = 0; i < 4; ++i) {
                if (i == omit) continue;
                tri[c++] = keys[i];
                at_t0 = at_t0 && std::abs(el.v[i][3] - R.t0) < 1e-12;
                at_t1 = at_t1 && std::abs(el.v[i][3] - R.t1) < 1e-12;
            }
            std::sort(tri.begin(), tri.end());
            auto [it, inserted] = facets.try_emplace(tri, 0, at_t0 || at_t1);
            it->second.first += 1;
        }
    }
    for (const auto& [tri, info] : facets) {
        const auto [count, boundary] = info;
        if (count == 2) continue;
        if (count == 1 && boundary) continue;
        char buf[96];
        std::snprintf(buf, sizeof buf, "facet used %d times (boundary=%d)", count,
                      int(boundary));
        why = buf;
        return false;
    }
    return true;
}

bool watertight_benchmarks(std::string& why) {
    struct Case {
        const char* problem;
        double dt, t_end;
    };
    for (const Case& c : {Case{"shrinking_sphere", 0.25, 1.0}, Case{"dziuk_moving", 0.1, 8.0}}) {
        const ProblemDefinition& p = problem_by_name(c.problem);
        const TetMesh mesh = build_box_mesh({}, 0.25);
        const SlabGeometry geo(&mesh, &p, TimeGrid(c.t_end, c.dt));
        ReconstructionOptions opts;
        opts.store_vertex_keys = true;
        for (int n = 1; n <= geo.grid().n_slabs; ++n) {
            const SlabReconstruction R = geo.reconstruct_slab(n, opts);
            std::string inner;
            if (!slab_watertight(R, inner)) {
                why = std::string(c.problem) + " slab " + std::to_string(n) + ": " + inner;
                return false;
            }
        }
    }
    why = "all slabs of both benchmark problems at h = 1/4";
    return true;
}

bool area_rate_two(std::string& why) {
    std::vector<double> errs;
    const ProblemDefinition& p = problem_by_name("static_sphere");
    for (double h : {0.5, 0.25, 0.125}) {
        const TetMesh mesh = build_box_mesh({}, h);
        const SlabGeometry geo(&mesh, &p, TimeGrid(1.0, 1.0));
        double area = 0.0;
        for (const CrossSectionElement& e : geo.cross_section_at(0.0).elements) area += e.area;
        errs.push_back(std::abs(area - 4.0 * M_PI));
    }
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) ratios.push_back(errs[i] / errs[i + 1]);
    why = "area error ratios " + fmt_list(ratios) + " (required [3.4, 4.6])";
    return all_in(ratios, 3.4, 4.6);
}

bool constants_exact(std::string& why) {
    ProblemDefinition p = problem_by_name("shrinking_sphere");
    const ProblemDefinition base = p;
    p.source = [base](const Vec3& x, double t, const Vec3& n) {
        return surface_coefficients(base, x, t, n).div_gamma_w;
    };
    const TetMesh mesh = build_box_mesh({}, 0.5);
    const SlabGeometry geo(&mesh, &p, TimeGrid(0.25, 0.25));
    const SlabSystem sys = assemble_slab(mesh, p, geo.reconstruct_slab(1),
                                         geo.cross_section_lower(1),
                                         [](int, const Vec3&) { return 1.0; });
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.dofs.n_dofs());
    const double res = (sys.A * ones - sys.b).norm();
    char buf[96];
    std::snprintf(buf, sizeof buf, "|A*1 - b| = %.3g (required <= 1e-9)", res);
    why = buf;
    return res <= 1e-9;
}

bool dense_oracle(std::string& why) {
    BoxDomain box;
    box.lo = Vec3(0, 0, 0);
    box.hi = Vec3(2, 1, 1);
    const TetMesh mesh = build_box_mesh(box, 1.0);
    ProblemDefinition p;
    p.name = "plane";
    p.nu = 0.8;
    p.level_set = [](const Vec3& x, double t) { return x[0] - 0.95 - 0.1 * t; };
    p.velocity = [](const Vec3&, double) { return Vec3(0.1, 0.03, -0.02); };
    p.velocity_jacobian = [](const Vec3&, double) { return Mat3(Mat3::Zero()); };
    p.alpha_explicit = [](const Vec3& x, double t) { return 0.7 + 0.1 * x[1] + t; };
    p.source = [](const Vec3& x, double t, const Vec3&) {
        return x[0] + 2.0 * x[1] - x[2] + 0.5 * t;
    };
    p.initial_value = [](const Vec3&) { return 0.0; };

    const double t0 = 0.0, t1 = 0.4;
    SlabReconstruction R;
    R.slab = 1;
    R.t0 = t0;
    R.t1 = t1;
    const std::int64_t NV = static_cast<std::int64_t>(mesh.vertices.size());
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        Prism4 pr;
        for (int i = 0; i < 4; ++i) {
            pr.verts[i] = mesh.vertices[mesh.tets[t][i]];
            pr.keys[i] = mesh.tets[t][i];
            pr.keys[4 + i] = NV + mesh.tets[t][i];
        }
        pr.t0 = t0;
        pr.t1 = t1;
        for (const Pentatope& P : subdivide_prism(pr)) {
            std::array<double, 5> phi;
            for (int i = 0; i < 5; ++i) {
                const bool top = P.keys[i] >= NV;
                const int vid = static_cast<int>(P.keys[i] % NV);
                phi[i] = p.level_set(mesh.vertices[vid], top ? t1 : t0);
            }
            march_pentatope(P, phi, static_cast<std::int32_t>(t), R.elements);
        }
    }

    CrossSection empty_lower;
    empty_lower.t = t0;
    const SlabSystem sys =
        assemble_slab(mesh, p, R, empty_lower, [](int, const Vec3&) { return 0.0; });
    const int nd = sys.dofs.n_dofs();
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nd, nd);
    Eigen::VectorXd bo = Eigen::VectorXd::Zero(nd);
    for (const SurfaceElement& e : R.elements) {
        const auto& tv = mesh.tets[e.parent_tet];
        for (const QuadPoint4& q : quadrature(e)) {
            const Vec3 x = q.x.head<3>();
            const double t = q.x[3];
            const SurfaceCoefficients co = surface_coefficients(p, x, t, e.n);
            const Vec3 wv = p.velocity(x, t);
            const double wq = q.w * e.beta;
            for (int i = 0; i < 4; ++i)
                for (int li = 0; li < 2; ++li) {
                    const BasisEval fi = basis_eval(mesh, e.parent_tet, t0, t1, i, li, x, t);
                    const Vec3 pgi = fi.grad - e.n * e.n.dot(fi.grad);
                    const int di = sys.dofs.dof(tv[i], li);
                    for (int j = 0; j < 4; ++j)
                        for (int lj = 0; lj < 2; ++lj) {
                            const BasisEval fj =
                                basis_eval(mesh, e.parent_tet, t0, t1, j, lj, x, t);
                            const Vec3 pgj = fj.grad - e.n * e.n.dot(fj.grad);
                            D(di, sys.dofs.dof(tv[j], lj)) +=
                                wq * ((fj.dt + wv.dot(fj.grad)) * fi.value +
                                      p.nu * pgj.dot(pgi) + co.alpha * fj.value * fi.value);
                        }
                    bo(di) += wq * p.source(x, t, e.n) * fi.value;
                }
        }
    }
    const double scale = D.cwiseAbs().maxCoeff();
    const double dA = (Eigen::MatrixXd(sys.A) - D).cwiseAbs().maxCoeff();
    const double db = (sys.b - bo).cwiseAbs().maxCoeff();
    char buf[96];
    std::snprintf(buf, sizeof buf, "max|dA| = %.3g, max|db| = %.3g (scale %.3g)", dA, db, scale);
    why = buf;
    return dA <= 1e-12 * scale && db <= 1e-12 * scale;
}

bool trace_unique(std::string& why) {
    const ProblemDefinition& p = problem_by_name("shrinking_sphere");
    const TetMesh mesh = build_box_mesh({}, 0.5);
    const SlabGeometry geo(&mesh, &p, TimeGrid(0.25, 0.25));
    const SlabReconstruction R = geo.reconstruct_slab(1);
    const SlabSystem sys = assemble_slab(mesh, p, R, geo.cross_section_lower(1),
                                         [](int, const Vec3&) { return 1.0; });
    SolveOptions amd;
    amd.ordering = SolverOrdering::amd;
    const SlabSolution sc = solve_slab(sys);
    const SlabSolution sa = solve_slab(sys, amd);
    double dmax = 0.0, vmax = 0.0;
    for (const SurfaceElement& e : R.elements)
        for (const QuadPoint4& q : quadrature(e)) {
            const Vec3 x = q.x.head<3>();
            const double vc = sc.value_in_tet(mesh, e.parent_tet, x, q.x[3]);
            const double va = sa.value_in_tet(mesh, e.parent_tet, x, q.x[3]);
            dmax = std::max(dmax, std::abs(vc - va));
            vmax = std::max(vmax, std::abs(vc));
        }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max trace difference %.3g (values up to %.3g)", dmax, vmax);
    why = buf;
    return dmax <= 1e-8 * std::max(1.0, vmax);
}

bool ellipticity_holds(std::string& why) {
    const ProblemDefinition& p = problem_by_name("expanding_sphere");
    const TetMesh mesh = build_box_mesh({}, 0.5);
    const SlabGeometry geo(&mesh, &p, TimeGrid(0.5, 0.25));
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<SlabSolution> sols;
        for (int n = 1; n <= 2; ++n) {
            SlabSolution s;
            s.dofs = build_dof_map(mesh, geo.reconstruct_slab(n));
            s.coeff.resize(s.dofs.n_dofs());
            for (int i = 0; i < s.coeff.size(); ++i) s.coeff[i] = u(rng);
            sols.push_back(std::move(s));
        }
        const EnergyReport rep = energy_check(geo, p, sols, 0.4);
        const double scale = std::max({1.0, std::abs(rep.energy), rep.lower_bound});
        worst = std::min(worst, rep.margin / scale);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst relative margin %.3g (required >= -1e-8)", worst);
    why = buf;
    return worst >= -1e-8;
}

CriterionResult c7_properties() {
    struct Prop {
        const char* name;
        bool (*fn)(std::string&);
    };
    const Prop props[] = {
        {"prism partition", prism_partition_exact}, {"watertight", watertight_benchmarks},
        {"area rate", area_rate_two},               {"constants", constants_exact},
        {"dense oracle", dense_oracle},             {"trace uniqueness", trace_unique},
        {"ellipticity", ellipticity_holds},
    };
    bool ok = true;
    std::string detail;
    for (const Prop& prop : props) {
        std::string why;
        const bool good = prop.fn(why);
        std::printf("  property %-16s %s (%s)\n", prop.name, good ? "ok" : "VIOLATED",
                    why.c_str());
        std::fflush(stdout);
        ok = ok && good;
        if (!good) {
            if (!detail.empty()) detail += "; ";
            detail += std::string(prop.name) + ": " + why;
        }
    }
    if (ok) detail = "all seven structural properties hold";
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        CriterionResult (*fn)();
    };
    const std::vector<Criterion> criteria = {
        {"c1_l2_space", c1_l2_space},     {"c2_l2_time", c2_l2_time},
        {"c3_h1_space", c3_h1_space},     {"c4_h1_time_exp", c4_h1_time_exp},
        {"c5_large_dt", c5_large_dt},     {"c6_mass", c6_mass},
        {"c7_properties", c7_properties},
    };

    std::set<std::string> wanted;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (std::none_of(criteria.begin(), criteria.end(),
                         [&](const Criterion& c) { return arg == c.name; })) {
            std::fprintf(stderr, "unknown criterion '%s'\n", arg.c_str());
            return 2;
        }
        wanted.insert(arg);
    }

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.name)) continue;
        CriterionResult r{false, ""};
        try {
            r = c.fn();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s: %s\n", r.ok ? "PASS" : "FAIL", c.name, r.detail.c_str());
        std::fflush(stdout);
        if (!r.ok) ++failures;
    }
    return failures;
}
