#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sttrace/driver.hpp"

namespace py = pybind11;

namespace {

sttrace::RunConfig config_from_dict(const py::dict& d) {
    sttrace::RunConfig cfg;
    for (auto item : d) {
        const std::string key = py::str(item.first);
        if (key == "problem")
            cfg.problem = item.second.cast<std::string>();
        else if (key == "h")
            cfg.h = item.second.cast<double>();
        else if (key == "dt")
            cfg.dt = item.second.cast<double>();
        else if (key == "t_end")
            cfg.t_end = item.second.cast<double>();
        else if (key == "box") {
            const auto v = item.second.cast<std::vector<double>>();
            if (v.size() != 6)
                throw sttrace::ConfigError("config key 'box': expected six numbers (lo, hi)");
            cfg.box.lo = sttrace::Vec3(v[0], v[1], v[2]);
            cfg.box.hi = sttrace::Vec3(v[3], v[4], v[5]);
        } else if (key == "outputs")
            cfg.outputs = item.second.cast<std::string>();
        else if (key == "dump_surfaces")
            cfg.dump_surfaces = item.second.cast<bool>();
        else if (key == "solver_tol")
            cfg.solver_tol = item.second.cast<double>();
        else if (key == "nu")
            cfg.nu_override = item.second.cast<double>();
        else
            throw sttrace::ConfigError("unknown config key '" + key + "'");
    }
    return cfg;
}

py::dict report_dict(const sttrace::ErrorReport& r) {
    py::dict d;
    d["err_l2_final"] = r.err_l2_final;
    d["err_l2h1"] = r.err_l2h1;
    d["mass_initial"] = r.mass_initial;
    d["mass_avg"] = r.mass_avg;
    d["mass_abs_err"] = r.mass_abs_err;
    py::list mass;
    for (const auto& mp : r.mass) mass.append(py::make_tuple(mp.t, mp.mass));
    d["mass"] = mass;
    return d;
}

py::list rows_list(const std::vector<sttrace::StudyRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        py::dict d = report_dict(r.report);
        d["level"] = r.level;
        d["h"] = r.h;
        d["dt"] = r.dt;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_sttrace, m) {
    m.doc() = "trace finite elements on evolving surfaces";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const sttrace::Error& e) {
            PyErr_SetString(PyExc_RuntimeError, (e.kind() + ": " + e.what()).c_str());
        }
    });

    m.def(
        "run",
        [](const py::dict& config) {
            const sttrace::RunConfig cfg = config_from_dict(config);
            const sttrace::RunOutcome out = sttrace::run(cfg);
            py::dict d = report_dict(out.report);
            d["wall_seconds"] = out.wall_seconds;
            d["nu"] = out.nu;
            d["n_slabs"] = out.n_slabs;
            return d;
        },
        py::arg("config"), "Run one configuration; writes CSVs into config['outputs'].");

    m.def(
        "convergence_study",
        [](const py::dict& config, const std::string& axis, int levels) {
            return rows_list(sttrace::convergence_study(config_from_dict(config), axis, levels));
        },
        py::arg("config"), py::arg("axis") = "space", py::arg("levels") = 3,
        "Halving refinement study; axis is 'space' or 'time'.");

    m.def(
        "mass_study",
        [](const py::dict& config, const std::string& series, int levels) {
            return rows_list(sttrace::mass_study(config_from_dict(config), series, levels));
        },
        py::arg("config"), py::arg("series") = "h", py::arg("levels") = 3,
        "Mass conservation study over a halving 'h' or 'dt' series.");

    m.def("observed_order", &sttrace::observed_order, py::arg("errors"),
          "log2 ratios of a halving error series.");

    m.def("problems", &sttrace::problem_names, "Names of the built-in problems.");

    m.def(
        "mesh_info",
        [](double h, const std::vector<double>& box) {
            if (box.size() != 6) throw sttrace::ConfigError("box needs six numbers (lo, hi)");
            sttrace::BoxDomain b;
            b.lo = sttrace::Vec3(box[0], box[1], box[2]);
            b.hi = sttrace::Vec3(box[3], box[4], box[5]);
            const sttrace::TetMesh mesh = sttrace::build_box_mesh(b, h);
            py::dict d;
            d["n_vertices"] = mesh.vertices.size();
            d["n_tets"] = mesh.tets.size();
            d["cells"] = py::make_tuple(mesh.cells[0], mesh.cells[1], mesh.cells[2]);
            return d;
        },
        py::arg("h"), py::arg("box") = std::vector<double>{-2, -2, -2, 2, 2, 2},
        "Background mesh sizes for a given resolution.");

    m.def(
        "slab_surface_measure",
        [](const std::string& problem, double h, double dt, double t_end, int slab) {
            const sttrace::ProblemDefinition p = sttrace::problem_by_name(problem);
            const sttrace::TetMesh mesh = sttrace::build_box_mesh({}, h);
            const sttrace::SlabGeometry geo(&mesh, &p, sttrace::TimeGrid(t_end, dt));
            const sttrace::SlabReconstruction R = geo.reconstruct_slab(slab);
            double measure = 0.0;
            for (const auto& e : R.elements)
                for (const auto& q : quadrature(e)) measure += q.w * e.beta;
            return measure;
        },
        py::arg("problem"), py::arg("h"), py::arg("dt"), py::arg("t_end"), py::arg("slab") = 1,
        "Integral of 1 over the reconstructed surface of one slab, i.e. the "
        "time integral of the surface area.");

    m.def(
        "cross_section_area",
        [](const std::string& problem, double h, double t) {
            const sttrace::ProblemDefinition p = sttrace::problem_by_name(problem);
            const sttrace::TetMesh mesh = sttrace::build_box_mesh({}, h);
            const sttrace::SlabGeometry geo(&mesh, &p, sttrace::TimeGrid(std::max(t, 1.0), std::max(t, 1.0)));
            const sttrace::CrossSection cs = geo.cross_section_at(t);
            double area = 0.0;
            for (const auto& e : cs.elements) area += e.area;
            return area;
        },
        py::arg("problem"), py::arg("h"), py::arg("t") = 0.0,
        "Area of the reconstructed surface at one time.");
}
