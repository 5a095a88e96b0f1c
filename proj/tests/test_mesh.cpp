#include <algorithm>
#include <map>
#include <random>

#include "doctest.h"
#include "sttrace/mesh.hpp"

using namespace sttrace;

TEST_CASE("box mesh sizes and volumes") {
    const TetMesh mesh = build_box_mesh({}, 1.0);
    CHECK(mesh.cells[0] == 4);
    CHECK(mesh.vertices.size() == 125);
    CHECK(mesh.tets.size() == 384);

    double vol = 0.0;
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        const double v = mesh.tet_volume(static_cast<int>(t));
        CHECK(v == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
        vol += v;
    }
    CHECK(vol == doctest::Approx(64.0).epsilon(1e-12));

    BoxDomain small;
    small.lo = Vec3(-1, -1, -1);
    small.hi = Vec3(1, 1, 1);
    const TetMesh m2 = build_box_mesh(small, 1.0);
    CHECK(m2.vertices.size() == 27);
    CHECK(m2.tets.size() == 48);
}

TEST_CASE("box extent must be an integer multiple of h") {
    BoxDomain box;
    box.lo = Vec3(0, 0, 0);
    box.hi = Vec3(1.0, 1.1, 1.0);
    CHECK_THROWS_WITH_AS(build_box_mesh(box, 0.5), doctest::Contains("axis y"), ConfigError);
    CHECK_THROWS_AS(build_box_mesh(box, -0.5), ConfigError);
}

TEST_CASE("mesh is face conforming") {
    const TetMesh mesh = build_box_mesh({}, 1.0);
    std::map<std::array<std::int32_t, 3>, int> faces;
    for (const auto& tv : mesh.tets) {
        for (int skip = 0; skip < 4; ++skip) {
            std::array<std::int32_t, 3> f;
            int k = 0;
            for (int i = 0; i < 4; ++i)
                if (i != skip) f[k++] = tv[i];
            std::sort(f.begin(), f.end());
            ++faces[f];
        }
    }
    int on_boundary = 0;
    for (const auto& [f, count] : faces) {
        CHECK((count == 1 || count == 2));
        if (count == 1) ++on_boundary;
    }
    // Two triangles per cell face, 16 cell faces per box side.
    CHECK(on_boundary == 6 * 16 * 2);
}

TEST_CASE("locate_point round trip") {
    const TetMesh mesh = build_box_mesh({}, 0.5);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 x(coord(rng), coord(rng), coord(rng));
        const LocateResult loc = locate_point(mesh, x);
        REQUIRE(loc.tet >= 0);
        Vec3 back = Vec3::Zero();
        double lsum = 0.0;
        for (int i = 0; i < 4; ++i) {
            CHECK(loc.bary[i] >= -1e-12);
            back += loc.bary[i] * mesh.vertices[mesh.tets[loc.tet][i]];
            lsum += loc.bary[i];
        }
        CHECK(lsum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((back - x).norm() <= 1e-12 * mesh.h);
    }
}

TEST_CASE("locate_point rejects points outside the box") {
    const TetMesh mesh = build_box_mesh({}, 1.0);
    CHECK_THROWS_AS(locate_point(mesh, Vec3(2.5, 0, 0)), OutOfDomainError);
    CHECK_THROWS_AS(locate_point(mesh, Vec3(0, -2.0001, 0)), OutOfDomainError);
}

TEST_CASE("time grid divisibility") {
    const TimeGrid g(1.0, 0.25);
    CHECK(g.n_slabs == 4);
    CHECK(g.t(0) == 0.0);
    CHECK(g.t(4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(TimeGrid(1.0, 0.3), ConfigError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 0.25), ConfigError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0.0), ConfigError);
}

TEST_CASE("barycentric coordinates and gradients are consistent") {
    const TetMesh mesh = build_box_mesh({}, 1.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u01(0.05, 0.3);
    for (int t : {0, 5, 100, 383}) {
        // A strictly interior point from random positive weights.
        double w[4], s = 0.0;
        for (double& v : w) s += (v = u01(rng));
        Vec3 x = Vec3::Zero();
        for (int i = 0; i < 4; ++i) x += (w[i] / s) * mesh.vertices[mesh.tets[t][i]];

        const auto lam = mesh.barycentric(t, x);
        const auto g = mesh.barycentric_gradients(t);
        Vec3 gsum = Vec3::Zero();
        for (int i = 0; i < 4; ++i) {
            CHECK(lam[i] == doctest::Approx(w[i] / s).epsilon(1e-12));
            gsum += g[i];
            // Gradient of lambda_i is constant: finite step along it changes
            // lambda_i by the squared norm times the step.
            const Vec3 xs = x + 0.01 * g[i];
            const auto lam2 = mesh.barycentric(t, xs);
            CHECK(lam2[i] - lam[i] == doctest::Approx(0.01 * g[i].squaredNorm()).epsilon(1e-9));
        }
        CHECK(gsum.norm() <= 1e-12);
    }
}
