#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "sttrace/driver.hpp"

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void print_outcome(const sttrace::RunConfig& cfg, const sttrace::RunOutcome& out) {
    std::cout << "problem=" << cfg.problem << " h=" << fmt(cfg.h) << " dt=" << fmt(cfg.dt)
              << " t_end=" << fmt(cfg.t_end) << " slabs=" << out.n_slabs
              << " err_l2_final=" << fmt(out.report.err_l2_final)
              << " err_l2h1=" << fmt(out.report.err_l2h1)
              << " mass_abs_err=" << fmt(out.report.mass_abs_err)
              << " wall_seconds=" << fmt(out.wall_seconds) << "\n";
    std::cout << "wrote " << cfg.outputs << "/run_summary.csv and " << cfg.outputs
              << "/mass.csv\n";
}

void print_rows(const std::vector<sttrace::StudyRow>& rows, bool with_errors) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::cout << "level=" << r.level << " h=" << fmt(r.h) << " dt=" << fmt(r.dt);
        if (with_errors)
            std::cout << " err_l2_final=" << fmt(r.report.err_l2_final)
                      << " err_l2h1=" << fmt(r.report.err_l2h1);
        std::cout << " mass_abs_err=" << fmt(r.report.mass_abs_err);
        if (i > 0 && r.report.mass_abs_err > 0.0)
            std::cout << " mass_ratio="
                      << fmt(rows[i - 1].report.mass_abs_err / r.report.mass_abs_err);
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace finite elements on evolving surfaces"};
    app.require_subcommand(1);

    std::string cfg_path;
    std::string axis = "space";
    std::string series = "h";
    int levels = 3;

    auto* c_run = app.add_subcommand("run", "run one configuration");
    c_run->add_option("config", cfg_path, "key=value config file")->required();

    auto* c_conv = app.add_subcommand("convergence", "halving refinement study");
    c_conv->add_option("config", cfg_path, "key=value config file")->required();
    c_conv->add_option("--axis", axis, "refinement axis")
        ->check(CLI::IsMember({"space", "time"}));
    c_conv->add_option("--levels", levels, "number of halvings")->check(CLI::PositiveNumber);

    auto* c_mass = app.add_subcommand("mass", "mass conservation study");
    c_mass->add_option("config", cfg_path, "key=value config file")->required();
    c_mass->add_option("--series", series, "refinement series")
        ->check(CLI::IsMember({"h", "dt"}));
    c_mass->add_option("--levels", levels, "number of halvings")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const sttrace::RunConfig cfg = sttrace::parse_config_file(cfg_path);
        if (c_run->parsed()) {
            print_outcome(cfg, sttrace::run(cfg));
        } else if (c_conv->parsed()) {
            print_rows(sttrace::convergence_study(cfg, axis, levels), true);
            std::cout << "wrote " << cfg.outputs << "/convergence.csv\n";
        } else {
            print_rows(sttrace::mass_study(cfg, series, levels), false);
            std::cout << "wrote " << cfg.outputs << "/mass_study.csv\n";
        }
        return 0;
    } catch (const sttrace::Error& e) {
        std::cerr << e.kind() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal_error: " << e.what() << "\n";
        return 2;
    }
}
