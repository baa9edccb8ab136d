#include <catch2/catch_amalgamated.hpp>

#include "atomscf/fixedpoint.hpp"
#include "atomscf/spectral.hpp"

#include <random>

using namespace atomscf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::shared_ptr<const RadialGrid> test_grid(int n = 1200) {
    static std::map<int, std::shared_ptr<const RadialGrid>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto g = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 60.0, n));
    cache[n] = g;
    return g;
}

Configuration helium(double z = 35.0) {
    Configuration c;
    c.mode = Mode::Unrestricted;
    c.z = z;
    c.q = 2;
    c.shells_u = {1};
    return c;
}

DensityState rank_one(const std::shared_ptr<const RadialGrid>& grid, int ell, int which, int spin) {
    auto p = channel_eigensolve(kinetic_nuclear_matrix(grid, ell), which + 1);
    DensityState s;
    s.grid = grid;
    s.spin_factor = spin;
    s.n_electrons = (2 * ell + 1) * spin;
    s.channels[ell].push_back(
        {grid->from_scaled(p[static_cast<std::size_t>(which)].vector), 1.0, ell + which + 1, 0.0});
    return s;
}

} // namespace

TEST_CASE("dense eigensolver handles diagonal and random matrices", "[spectral]") {
    Mat d = Mat::Zero(2, 2);
    d(0, 0) = -1.0;
    d(1, 1) = -0.25;
    auto p = dense_eigensolve(d, 2);
    CHECK_THAT(p[0].value, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(p[1].value, WithinAbs(-0.25, 1e-15));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Mat a(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = gauss(rng);
    auto full = dense_eigensolve(a, 50);
    Mat v(50, 50);
    Vec lam(50);
    for (int j = 0; j < 50; ++j) {
        v.col(j) = full[static_cast<std::size_t>(j)].vector;
        lam[j] = full[static_cast<std::size_t>(j)].value;
    }
    CHECK((a - v * lam.asDiagonal() * v.transpose()).norm() <= 1e-10 * a.norm() + 1e-12);
}

TEST_CASE("channel eigensolve reproduces the hydrogenic channel spectrum", "[spectral]") {
    auto grid = test_grid();
    auto p = channel_eigensolve(kinetic_nuclear_matrix(grid, 0), 3);
    CHECK_THAT(p[0].value, WithinRel(-1.0, 1e-6));
    CHECK_THAT(p[1].value, WithinRel(-0.25, 1e-6));
    CHECK_THAT(p[2].value, WithinRel(-1.0 / 9.0, 1e-6));
}

TEST_CASE("projection distances: identity and rank-one cases", "[spectral]") {
    auto grid = test_grid(800);
    auto p = rank_one(grid, 0, 0, 1);
    auto d0 = distances(p, p);
    CHECK_THAT(d0.hs, WithinAbs(0.0, 1e-12));
    CHECK_THAT(d0.trace, WithinAbs(0.0, 1e-12));

    auto q = rank_one(grid, 0, 1, 1); // orthogonal 2s-type orbital
    auto d = distances(p, q);
    CHECK_THAT(d.hs, WithinAbs(std::sqrt(2.0), 1e-10));
    CHECK_THAT(d.trace, WithinAbs(2.0, 1e-10));

    // same pair placed in an l=1 channel with spin factor 2: multiplicity 6
    auto p1 = rank_one(grid, 1, 0, 2);
    auto q1 = rank_one(grid, 1, 1, 2);
    CHECK_THAT(distances(p1, q1).hs, WithinAbs(std::sqrt(12.0), 1e-10));
}

TEST_CASE("trace norm dominated by sqrt(2N) times hs for rank-N pairs", "[spectral]") {
    auto grid = test_grid(800);
    Configuration cfg;
    cfg.mode = Mode::Unrestricted;
    cfg.z = 60.0;
    cfg.q = 2;
    cfg.shells_u = {1, 2};
    std::mt19937_64 rng(9);
    for (int t = 0; t < 5; ++t) {
        auto p = random_state(cfg, grid, rng);
        auto q = random_state(cfg, grid, rng);
        auto d = distances(p, q);
        CHECK(d.hs <= d.trace + 1e-12);
        CHECK(d.trace <= std::sqrt(2.0 * cfg.n_electrons()) * d.hs + 1e-10);
    }
}

TEST_CASE("spectral projection map on helium-like configurations", "[spectral]") {
    auto grid = test_grid();
    auto cfg = helium();
    auto s = hydrogenic_state(cfg, grid);
    auto mapped = spectral_projection_map(cfg, s);
    REQUIRE(mapped.channels.count(0) == 1);
    REQUIRE(mapped.channels.at(0).size() == 1);
    CHECK_THAT(mapped.trace(), WithinAbs(2.0, 1e-12));
    double eps = mapped.channels.at(0)[0].eps;
    CHECK(eps >= -1.0);
    CHECK(eps <= -1.0 + 8.0 / 35.0);
}

TEST_CASE("window construction failure propagates as gap violation", "[spectral]") {
    auto grid = test_grid(800);
    Configuration cfg;
    cfg.mode = Mode::Unrestricted;
    cfg.z = 20.0; // 4N/Z = 2 overlaps the level spacing
    cfg.q = 2;
    cfg.shells_u = {1, 2};
    auto s = hydrogenic_state(helium(), grid);
    s.spin_factor = 2;
    CHECK_THROWS_AS(spectral_projection_map(cfg, s), gap_violation_error);
}

TEST_CASE("count mismatch inside a window names channel and window", "[spectral]") {
    // restricted (1,0) at small Z: the window is wide enough to catch the 2s
    // and 3s levels as well -> selection must refuse
    auto grid = test_grid();
    Configuration cfg;
    cfg.mode = Mode::Restricted;
    cfg.z = 4.5;
    cfg.q = 1;
    cfg.shells_r = {{1, 0}};
    auto s = hydrogenic_state(cfg, grid);
    try {
        spectral_projection_map(cfg, s);
        FAIL("expected gap violation");
    } catch (const gap_violation_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("channel l=0") != std::string::npos);
        CHECK(msg.find("window") != std::string::npos);
    }
}

TEST_CASE("restricted map prescribes per-shell channel counts", "[spectral]") {
    auto grid = test_grid(1500);
    Configuration cfg;
    cfg.mode = Mode::Restricted;
    cfg.z = 150.0;
    cfg.q = 1;
    cfg.shells_r = {{1, 0}, {2, 0}, {2, 1}};
    auto mapped = spectral_projection_map(cfg, hydrogenic_state(cfg, grid));
    REQUIRE(mapped.channels.at(0).size() == 2);
    REQUIRE(mapped.channels.at(1).size() == 1);
    CHECK_THAT(mapped.occupancy(1, mapped.channels.at(1)[0]), WithinAbs(3.0, 1e-12));
    CHECK_THAT(mapped.trace(), WithinAbs(5.0, 1e-12));
}

TEST_CASE("projection comparison: identical operators", "[spectral]") {
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = -0.2;
    a(1, 1) = 0.1;
    a(2, 2) = 2.0;
    auto r = projection_bound_check(a, a, -0.5, 0.5);
    CHECK_THAT(r.lhs, WithinAbs(0.0, 1e-14));
    CHECK(r.holds);
}

TEST_CASE("projection comparison: 2x2 rotation", "[spectral]") {
    // oracle: exact 2x2 diagonalization, lhs = sqrt(2) sin(theta)
    double theta = 0.1;
    Mat a = Mat::Zero(2, 2);
    a(1, 1) = 2.0;
    Mat rot(2, 2);
    rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    Mat b = rot * a * rot.transpose();
    auto r = projection_bound_check(a, b, -0.5, 0.5);
    CHECK_THAT(r.lhs, WithinAbs(std::sqrt(2.0) * std::sin(theta), 1e-12));
    CHECK(r.holds);
}

TEST_CASE("projection comparison rejects windows that see no spectrum", "[spectral]") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 3.0;
    Mat b = Mat::Zero(2, 2);
    b(0, 0) = 2.5;
    b(1, 1) = 3.5;
    CHECK_THROWS_AS(projection_bound_check(a, b, -0.5, 0.5), std::invalid_argument);
}
