#include <catch2/catch_amalgamated.hpp>

#include "atomscf/hartree.hpp"

using namespace atomscf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("single electron: hydrogenic ground energy", "[hartree]") {
    auto sol = restricted_minimize(1, 2.5, 1e-11);
    REQUIRE(sol.converged);
    CHECK_THAT(sol.energy, WithinAbs(-6.25, 1e-6));
    CHECK_THAT(sol.energy_rescaled, WithinAbs(-1.0, 1e-7));
}

TEST_CASE("restricted helium-like minimum at Z=35", "[hartree]") {
    auto sol = restricted_minimize(2, 35.0, 1e-11);
    REQUIRE(sol.converged);
    // first-order band and the variational single-exponent upper bound
    CHECK(std::abs(sol.energy_rescaled - (-2.0 + 1.25 / 35.0)) < 2e-3);
    CHECK(sol.energy_rescaled <= -2.0 * std::pow(1.0 - 1.0 / 112.0, 2) + 1e-6);
    CHECK(sol.energy_rescaled >= -2.0);

    // minimizer positivity: no sign change on the grid
    const Vec& u = sol.orbitals[0];
    double lo = u.minCoeff();
    CHECK(lo > -1e-12 * u.maxCoeff());
}

TEST_CASE("restricted functional near the Ruskai-Stillinger regime", "[hartree]") {
    // Z = 1.02: rescaled minimum stays above -1; Z = 1: above -1 - 1e-6
    auto grid102 = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 408.0, 2200));
    auto s102 = restricted_minimize(2, 1.02, 1e-11, grid102);
    REQUIRE(s102.converged);
    CHECK(s102.energy_rescaled > -1.0);

    auto grid100 = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 400.0, 2200));
    auto s100 = restricted_minimize(2, 1.0, 1e-11, grid100);
    REQUIRE(s100.converged);
    CHECK(s100.energy_rescaled >= -1.0 - 1e-6);
}

TEST_CASE("unrestricted collapse in the Theorem 3 regime", "[hartree]") {
    auto res = restricted_minimize(2, 35.0, 1e-11);
    auto unr = unrestricted_minimize(2, 35.0, 2, 1e-11);
    REQUIRE(unr.converged);
    CHECK(unr.symmetric);
    CHECK(unr.orbital_spread < 1e-6);
    CHECK_THAT(unr.energy_rescaled, WithinAbs(res.energy_rescaled, 1e-8));
    for (auto& st : unr.starts) {
        INFO(st.kind);
        CHECK(st.converged);
        CHECK(std::abs(st.energy_rescaled - unr.energy_rescaled) < 1e-8);
    }
}

TEST_CASE("phase segregation at Z = 1.02", "[hartree]") {
    auto grid = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 408.0, 2200));
    auto res = restricted_minimize(2, 1.02, 1e-11, grid);
    auto unr = unrestricted_minimize(2, 1.02, 2, 1e-11, grid);
    REQUIRE(unr.converged);
    CHECK(unr.energy <= -1.02);          // unscaled Rydberg: compact orbital near -Z^2
    CHECK_FALSE(unr.symmetric);
    CHECK(unr.energy < res.energy);      // unrestricted beats restricted
    CHECK(res.energy - unr.energy > 0.01);
}

TEST_CASE("restricted energy dominates the unrestricted minimum", "[hartree]") {
    for (double z : {1.05, 35.0}) {
        auto grid = (z < 2.0)
                        ? std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 400.0 * z, 2200))
                        : default_hartree_grid();
        auto res = restricted_minimize(2, z, 1e-11, grid);
        auto unr = unrestricted_minimize(2, z, 2, 1e-11, grid);
        CHECK(res.energy >= unr.energy - 1e-9);
    }
}

TEST_CASE("segregation scan rows", "[hartree]") {
    auto rows = segregation_scan({1.0, 1.02});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].restricted_rescaled >= -1.0 - 1e-6);
    CHECK(rows[1].restricted_rescaled > -1.0);
    CHECK(rows[1].unrestricted_energy <= -1.02);
    CHECK(rows[1].segregated);
}

TEST_CASE("hartree rejects non-positive charge", "[hartree]") {
    CHECK_THROWS_AS(restricted_minimize(2, -1.0), invalid_config_error);
    CHECK_THROWS_AS(unrestricted_minimize(2, 0.0), invalid_config_error);
}
