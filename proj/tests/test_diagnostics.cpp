#include <cmath>
#include <limits>

#include "doctest.h"
#include "sttrace/driver.hpp"

using namespace sttrace;

TEST_CASE("static sphere run reproduces the constant solution") {
    RunConfig cfg;
    cfg.problem = "static_sphere";
    cfg.h = 0.5;
    cfg.dt = 0.25;
    cfg.t_end = 0.5;
    const Simulation sim(cfg);
    const RunState s = sim.state();
    const ErrorReport rep = compute_report(s);

    CHECK(rep.err_l2_final <= 1e-9);
    CHECK(rep.err_l2h1 <= 1e-7);

    REQUIRE(rep.mass.size() == 2);
    CHECK(rep.mass[0].t == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(rep.mass[1].t == doctest::Approx(0.5).epsilon(1e-14));
    // The surface never moves, so every mass sample equals the initial one.
    CHECK(rep.mass_initial == doctest::Approx(4.0 * M_PI).epsilon(0.05));
    for (const MassPoint& m : rep.mass)
        CHECK(m.mass == doctest::Approx(rep.mass_initial).epsilon(1e-9));
    CHECK(rep.mass_abs_err <= 1e-8 * rep.mass_initial);

    ErrorReport direct;
    mass_trajectory(s, direct);
    CHECK(direct.mass_initial == rep.mass_initial);
    CHECK(direct.mass_avg == rep.mass_avg);
}

TEST_CASE("error measures demand an exact solution") {
    RunConfig cfg;
    cfg.problem = "dziuk_moving";
    cfg.h = 0.5;
    cfg.dt = 0.25;
    cfg.t_end = 0.5;
    const Simulation sim(cfg);
    const RunState s = sim.state();

    CHECK_THROWS_WITH_AS(l2_error_final(s), doctest::Contains("no exact solution"), ConfigError);
    CHECK_THROWS_WITH_AS(l2h1_error(s), doctest::Contains("no exact solution"), ConfigError);

    const ErrorReport rep = compute_report(s);
    CHECK(std::isnan(rep.err_l2_final));
    CHECK(std::isnan(rep.err_l2h1));
    CHECK(rep.mass.size() == 2);
    CHECK(rep.mass_initial > 10.0);
    CHECK(rep.mass_avg > 10.0);
}

TEST_CASE("observed orders from halving series") {
    const auto inf = std::numeric_limits<double>::infinity();

    auto o = observed_order({4.0, 1.0});
    REQUIRE(o.size() == 1);
    CHECK(o[0] == doctest::Approx(2.0).epsilon(1e-14));

    o = observed_order({4.0, 2.0, 1.0});
    REQUIRE(o.size() == 2);
    CHECK(o[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(o[1] == doctest::Approx(1.0).epsilon(1e-14));

    o = observed_order({1.0, 1.0});
    CHECK(o[0] == doctest::Approx(0.0).epsilon(1e-14));

    o = observed_order({1.0, 0.0});
    CHECK(o[0] == inf);

    CHECK(observed_order({1.0}).empty());
}
