#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sttrace/diagnostics.hpp"
#include "sttrace/linsolve.hpp"

namespace sttrace {

/// One run specification, parsed from a flat key=value file. Unknown keys are
/// rejected. Recognized keys: problem, h, dt, t_end, box (six numbers,
/// lo then hi), outputs, dump_surfaces, solver_tol, nu.
struct RunConfig {
    std::string problem = "shrinking_sphere";
    double h = 0.5;
    double dt = 0.25;
    double t_end = 1.0;
    BoxDomain box;
    std::string outputs = "outputs";
    bool dump_surfaces = false;
    double solver_tol = 1e-10;
    std::optional<double> nu_override;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Owns one complete time march: builds the meshes, interpolates the initial
/// data, then reconstructs, assembles and solves slab by slab.
class Simulation {
public:
    explicit Simulation(const RunConfig& cfg);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    RunState state() const;
    const RunConfig& config() const { return cfg_; }
    const ProblemDefinition& problem() const { return problem_; }
    const TetMesh& mesh() const { return mesh_; }
    const TimeGrid& time_grid() const { return grid_; }
    const SlabGeometry& geometry() const { return *geo_; }
    const NodalField& initial() const { return *initial_; }
    const std::vector<SlabSolution>& slabs() const { return slabs_; }

private:
    RunConfig cfg_;
    ProblemDefinition problem_;
    TimeGrid grid_;
    TetMesh mesh_;
    std::unique_ptr<SlabGeometry> geo_;
    std::unique_ptr<NodalField> initial_;
    std::vector<SlabSolution> slabs_;
};

struct RunOutcome {
    ErrorReport report;
    double wall_seconds = 0.0;
    double nu = 0.0;
    int n_slabs = 0;
};

/// Runs one configuration end to end and writes run_summary.csv and mass.csv
/// (plus surface_NNNN.vtk dumps when enabled) into cfg.outputs.
RunOutcome run(const RunConfig& cfg);

struct StudyRow {
    int level = 0;
    double h = 0.0;
    double dt = 0.0;
    ErrorReport report;
};

/// Halving refinement study along one axis ("space" halves h, "time" halves
/// dt). Level k runs into cfg.outputs/level_k; the collected errors and
/// observed orders go to cfg.outputs/convergence.csv. A failing level writes
/// the partial table with a FAILED,<error kind> sentinel row and rethrows.
std::vector<StudyRow> convergence_study(const RunConfig& base, const std::string& axis,
                                        int levels);

/// Mass conservation study over a halving series ("h" or "dt"); writes
/// cfg.outputs/mass_study.csv with per-level |M(0) - avg M_h| and the
/// level-to-level error ratios. Same sentinel convention on failure.
std::vector<StudyRow> mass_study(const RunConfig& base, const std::string& series, int levels);

/// Writes a reconstructed cross section as legacy ASCII VTK PolyData with one
/// point scalar "u". Vertices are deduplicated by their interpolation keys,
/// so the triangulation is watertight in the file as well.
void write_surface_vtk(const CrossSection& cs,
                       const std::function<double(int, const Vec3&)>& field,
                       const std::string& path);

}  // namespace sttrace
