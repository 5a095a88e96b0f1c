#include "sttrace/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace sttrace {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse number '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

BoxDomain parse_box(const std::string& v) {
    std::istringstream in(v);
    double c[6];
    for (double& x : c)
        if (!(in >> x)) throw ConfigError("config key 'box': expected six numbers (lo, hi)");
    std::string rest;
    if (in >> rest) throw ConfigError("config key 'box': expected six numbers (lo, hi)");
    BoxDomain b;
    b.lo = Vec3(c[0], c[1], c[2]);
    b.hi = Vec3(c[3], c[4], c[5]);
    for (int a = 0; a < 3; ++a)
        if (!(b.hi[a] > b.lo[a]))
            throw ConfigError("config key 'box': hi must exceed lo on every axis");
    return b;
}

std::vector<std::int32_t> parent_tets(const CrossSection& cs) {
    std::vector<std::int32_t> r;
    r.reserve(cs.elements.size());
    for (const auto& e : cs.elements) r.push_back(e.parent_tet);
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw IoError("cannot create output directory '" + path + "': " + ec.message());
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    return f;
}

void write_convergence_csv(const std::string& path, const std::vector<StudyRow>& rows,
                           const std::string* fail_kind) {
    std::vector<double> e_l2, e_h1;
    for (const auto& r : rows) {
        e_l2.push_back(r.report.err_l2_final);
        e_h1.push_back(r.report.err_l2h1);
    }
    const auto o_l2 = observed_order(e_l2);
    const auto o_h1 = observed_order(e_h1);
    auto f = open_output(path);
    f << "level,h,dt,err_l2_final,order_l2_final,err_l2h1,order_l2h1,mass_abs_err\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        f << r.level << ',' << fmt(r.h) << ',' << fmt(r.dt) << ',' << fmt(e_l2[i]) << ','
          << (i ? fmt(o_l2[i - 1]) : "nan") << ',' << fmt(e_h1[i]) << ','
          << (i ? fmt(o_h1[i - 1]) : "nan") << ',' << fmt(r.report.mass_abs_err) << '\n';
    }
    if (fail_kind) f << "FAILED," << *fail_kind << '\n';
}

void write_mass_study_csv(const std::string& path, const std::vector<StudyRow>& rows,
                          const std::string* fail_kind) {
    auto f = open_output(path);
    f << "level,h,dt,mass_initial,mass_avg,mass_abs_err,ratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        f << r.level << ',' << fmt(r.h) << ',' << fmt(r.dt) << ',' << fmt(r.report.mass_initial)
          << ',' << fmt(r.report.mass_avg) << ',' << fmt(r.report.mass_abs_err) << ',';
        if (i == 0)
            f << "nan";
        else
            f << fmt(rows[i - 1].report.mass_abs_err / r.report.mass_abs_err);
        f << '\n';
    }
    if (fail_kind) f << "FAILED," << *fail_kind << '\n';
}

template <class StudyFn>
std::vector<StudyRow> run_study(const RunConfig& base, int levels, bool halve_h,
                                const std::string& csv_name, const StudyFn& write_csv) {
    if (levels < 1) throw ConfigError("levels must be at least 1");
    ensure_directory(base.outputs);
    const std::string csv = base.outputs + "/" + csv_name;
    std::vector<StudyRow> rows;
    RunConfig cfg = base;
    for (int lvl = 0; lvl < levels; ++lvl) {
        cfg.outputs = base.outputs + "/level_" + std::to_string(lvl);
        try {
            const RunOutcome out = run(cfg);
            rows.push_back({lvl, cfg.h, cfg.dt, out.report});
        } catch (const Error& e) {
            write_csv(csv, rows, &e.kind());
            throw;
        }
        if (halve_h)
            cfg.h *= 0.5;
        else
            cfg.dt *= 0.5;
    }
    write_csv(csv, rows, nullptr);
    return rows;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");

        if (key == "problem")
            cfg.problem = val;
        else if (key == "h")
            cfg.h = parse_double(key, val);
        else if (key == "dt")
            cfg.dt = parse_double(key, val);
        else if (key == "t_end")
            cfg.t_end = parse_double(key, val);
        else if (key == "box")
            cfg.box = parse_box(val);
        else if (key == "outputs")
            cfg.outputs = val;
        else if (key == "dump_surfaces")
            cfg.dump_surfaces = parse_bool(key, val);
        else if (key == "solver_tol")
            cfg.solver_tol = parse_double(key, val);
        else if (key == "nu")
            cfg.nu_override = parse_double(key, val);
        else
            throw ConfigError("unknown config key '" + key + "'");
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

Simulation::Simulation(const RunConfig& cfg)
    : cfg_(cfg), problem_(problem_by_name(cfg.problem)), grid_(cfg.t_end, cfg.dt) {
    if (cfg.solver_tol <= 0.0) throw ConfigError("solver_tol must be positive");
    if (cfg.nu_override) {
        if (!(*cfg.nu_override > 0.0)) throw ConfigError("nu must be positive");
        problem_.nu = *cfg.nu_override;
    }
    mesh_ = build_box_mesh(cfg.box, cfg.h);
    geo_ = std::make_unique<SlabGeometry>(&mesh_, &problem_, grid_);

    const CrossSection cs0 = geo_->cross_section_lower(1);
    initial_ = std::make_unique<NodalField>(
        &mesh_, parent_tets(cs0),
        [this](const Vec3& x) { return problem_.extended_initial_value(x); });

    slabs_.reserve(grid_.n_slabs);
    for (int n = 1; n <= grid_.n_slabs; ++n) {
        PrevEvaluator prev;
        if (n == 1) {
            prev = [this](int tet, const Vec3& x) { return initial_->value_in_tet(tet, x); };
        } else {
            const SlabSolution* pu = &slabs_.back();
            const double tp = grid_.t(n - 1);
            prev = [this, pu, tp](int tet, const Vec3& x) {
                return pu->value_in_tet(mesh_, tet, x, tp);
            };
        }
        SlabSystem sys;
        {
            // The reconstruction is by far the largest transient object;
            // release it before the factorization claims its own memory.
            const SlabReconstruction R = geo_->reconstruct_slab(n);
            const CrossSection lower = geo_->cross_section_lower(n);
            sys = assemble_slab(mesh_, problem_, R, lower, prev);
        }
        slabs_.push_back(solve_slab(sys, SolveOptions{cfg.solver_tol, SolverOrdering::colamd}));
    }
}

RunState Simulation::state() const {
    RunState s;
    s.mesh = &mesh_;
    s.geo = geo_.get();
    s.problem = &problem_;
    s.grid = grid_;
    s.initial = initial_.get();
    s.slabs = &slabs_;
    return s;
}

RunOutcome run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    const Simulation sim(cfg);
    RunOutcome out;
    out.report = compute_report(sim.state());
    out.nu = sim.problem().nu;
    out.n_slabs = sim.time_grid().n_slabs;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ensure_directory(cfg.outputs);
    {
        auto f = open_output(cfg.outputs + "/run_summary.csv");
        f << "problem,h,dt,t_end,nu,err_l2_final,err_l2h1,mass_abs_err,wall_seconds\n";
        f << cfg.problem << ',' << fmt(cfg.h) << ',' << fmt(cfg.dt) << ',' << fmt(cfg.t_end)
          << ',' << fmt(out.nu) << ',' << fmt(out.report.err_l2_final) << ','
          << fmt(out.report.err_l2h1) << ',' << fmt(out.report.mass_abs_err) << ','
          << fmt(out.wall_seconds) << '\n';
    }
    {
        auto f = open_output(cfg.outputs + "/mass.csv");
        for (const MassPoint& mp : out.report.mass)
            f << fmt(mp.t) << ',' << fmt(mp.mass) << '\n';
    }
    if (cfg.dump_surfaces) {
        const auto& geo = sim.geometry();
        const CrossSection cs0 = geo.cross_section_lower(1);
        write_surface_vtk(
            cs0, [&](int tet, const Vec3& x) { return sim.initial().value_in_tet(tet, x); },
            cfg.outputs + "/surface_0000.vtk");
        for (int n = 1; n <= out.n_slabs; ++n) {
            const CrossSection cs = geo.cross_section_upper(n);
            const SlabSolution& u = sim.slabs()[n - 1];
            const double t = sim.time_grid().t(n);
            char name[32];
            std::snprintf(name, sizeof name, "surface_%04d.vtk", n);
            write_surface_vtk(
                cs,
                [&](int tet, const Vec3& x) { return u.value_in_tet(sim.mesh(), tet, x, t); },
                cfg.outputs + "/" + name);
        }
    }
    return out;
}

std::vector<StudyRow> convergence_study(const RunConfig& base, const std::string& axis,
                                        int levels) {
    if (axis != "space" && axis != "time")
        throw ConfigError("axis must be 'space' or 'time', got '" + axis + "'");
    return run_study(base, levels, axis == "space", "convergence.csv", write_convergence_csv);
}

std::vector<StudyRow> mass_study(const RunConfig& base, const std::string& series, int levels) {
    if (series != "h" && series != "dt")
        throw ConfigError("series must be 'h' or 'dt', got '" + series + "'");
    return run_study(base, levels, series == "h", "mass_study.csv", write_mass_study_csv);
}

void write_surface_vtk(const CrossSection& cs,
                       const std::function<double(int, const Vec3&)>& field,
                       const std::string& path) {
    if (cs.elements.empty()) throw GeometryError("cannot dump an empty cross section");
    std::unordered_map<std::int64_t, int> index;
    std::vector<Vec3> pts;
    std::vector<double> vals;
    std::vector<std::array<int, 3>> tris;
    for (const CrossSectionElement& e : cs.elements) {
        std::array<int, 3> tri;
        for (int c = 0; c < 3; ++c) {
            const auto [it, inserted] =
                index.try_emplace(e.vertex_keys[c], static_cast<int>(pts.size()));
            if (inserted) {
                pts.push_back(e.v[c]);
                vals.push_back(field(e.parent_tet, e.v[c]));
            }
            tri[c] = it->second;
        }
        tris.push_back(tri);
    }
    auto f = open_output(path);
    f << "# vtk DataFile Version 3.0\n";
    f << "surface t=" << fmt(cs.t) << "\n";
    f << "ASCII\nDATASET POLYDATA\n";
    f << "POINTS " << pts.size() << " double\n";
    for (const Vec3& p : pts) f << fmt(p.x()) << ' ' << fmt(p.y()) << ' ' << fmt(p.z()) << '\n';
    f << "POLYGONS " << tris.size() << ' ' << 4 * tris.size() << '\n';
    for (const auto& t : tris) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    f << "POINT_DATA " << pts.size() << "\nSCALARS u double 1\nLOOKUP_TABLE default\n";
    for (double v : vals) f << fmt(v) << '\n';
}

}  // namespace sttrace
