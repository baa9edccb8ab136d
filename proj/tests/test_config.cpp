#include <catch2/catch_amalgamated.hpp>

#include "atomscf/config.hpp"

#include <random>

using namespace atomscf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
Configuration uhf(double z, int q, std::vector<int> shells) {
    Configuration c;
    c.mode = Mode::Unrestricted;
    c.z = z;
    c.q = q;
    c.shells_u = std::move(shells);
    return c;
}
} // namespace

TEST_CASE("derive_counts per mode", "[config]") {
    auto [n1, d1] = derive_counts(uhf(35, 2, {1}));
    CHECK(n1 == 2);
    CHECK_THAT(d1, WithinAbs(0.75, 1e-15));

    auto [n2, d2] = derive_counts(uhf(1000, 2, {1, 2}));
    CHECK(n2 == 10);
    CHECK_THAT(d2, WithinAbs(5.0 / 36.0, 1e-15));

    Configuration r;
    r.mode = Mode::Restricted;
    r.z = 150;
    r.q = 1;
    r.shells_r = {{1, 0}, {2, 0}, {2, 1}};
    auto [n3, d3] = derive_counts(r);
    CHECK(n3 == 5);
    CHECK_THAT(d3, WithinAbs(5.0 / 36.0, 1e-15));
}

TEST_CASE("duplicate or invalid shells rejected", "[config]") {
    CHECK_THROWS_AS(derive_counts(uhf(35, 2, {1, 1})), invalid_config_error);
    CHECK_THROWS_AS(derive_counts(uhf(35, 2, {2, 1})), invalid_config_error);
    Configuration r;
    r.mode = Mode::Restricted;
    r.z = 10;
    r.shells_r = {{2, 0}, {2, 0}};
    CHECK_THROWS_AS(validate(r), invalid_config_error);
    r.shells_r = {{2, 2}};
    CHECK_THROWS_AS(validate(r), invalid_config_error); // l > n-1
    r.shells_r = {{1, 0}};
    r.q = 2;
    CHECK_THROWS_AS(validate(r), invalid_config_error); // restricted needs q = 1
}

TEST_CASE("z threshold formulas", "[config]") {
    auto gr = z_thresholds(uhf(100, 2, {1}));
    CHECK_THAT(gr.z_threshold_thm1, WithinRel(224.0 / 3.0, 1e-14));
    CHECK_THAT(gr.z_threshold_thm3, WithinRel(104.0 / 3.0, 1e-14));
    // N = 3 Hartree row: threshold ~ 50.4 -> smallest integer 51
    Configuration h;
    h.mode = Mode::Hartree;
    h.z = 60;
    h.q = 3;
    h.shells_u = {1};
    auto g3 = z_thresholds(h);
    CHECK(g3.z_threshold_thm3 > 50.0);
    CHECK(g3.z_threshold_thm3 < 51.0);
    CHECK(static_cast<int>(std::ceil(g3.z_threshold_thm3)) == 51);
}

TEST_CASE("threshold table reproduces the published row", "[config]") {
    auto tab = threshold_table();
    const int expect[8] = {35, 51, 66, 81, 96, 111, 126, 140};
    REQUIRE(tab.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        INFO("N = " << tab[i].n << " threshold " << tab[i].threshold);
        CHECK(tab[i].z_ceiling == expect[i]);
        CHECK(tab[i].match);
    }
}

TEST_CASE("gap report validity flag", "[config]") {
    auto ok = z_thresholds(uhf(35, 2, {1}));
    CHECK(ok.delta_valid);
    CHECK_THAT(ok.delta, WithinAbs(0.75 - 8.0 / 35.0, 1e-14));
    auto bad = z_thresholds(uhf(10, 2, {1})); // 4N/Z = 0.8 > 0.75
    CHECK_FALSE(bad.delta_valid);
}

TEST_CASE("build_window examples", "[config]") {
    auto w = build_window(uhf(100, 2, {1}));
    REQUIRE(w.intervals.size() == 1);
    CHECK_THAT(w.intervals[0].lo, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(w.intervals[0].hi, WithinAbs(-0.92, 1e-12));
    CHECK(w.expected_count == 2);

    auto w2 = build_window(uhf(1000, 2, {1, 2}));
    REQUIRE(w2.intervals.size() == 2);
    CHECK_THAT(w2.intervals[0].lo, WithinAbs(-1.0, 1e-15));
    CHECK_THAT(w2.intervals[0].hi, WithinAbs(-0.96, 1e-12));
    CHECK_THAT(w2.intervals[1].lo, WithinAbs(-0.25, 1e-15));
    CHECK_THAT(w2.intervals[1].hi, WithinAbs(-0.21, 1e-12));

    CHECK_THROWS_AS(build_window(uhf(20, 2, {1, 2})), gap_violation_error);
}

TEST_CASE("shell-counting identity", "[config]") {
    // sum over channels of (2l+1) q #{k : n_k >= l+1} = N
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        int q = 1 + static_cast<int>(rng() % 3);
        std::vector<int> shells;
        int n = 1;
        for (int s = 0; s < 1 + static_cast<int>(rng() % 3); ++s) {
            n += static_cast<int>(rng() % 2);
            shells.push_back(n);
            n += 1;
        }
        auto cfg = uhf(1e6, q, shells);
        int lhs = 0;
        for (int l = 0; l < cfg.max_n(); ++l) {
            int cnt = 0;
            for (int nk : shells)
                if (nk >= l + 1) ++cnt;
            lhs += (2 * l + 1) * q * cnt;
        }
        CHECK(lhs == cfg.n_electrons());
    }
}

TEST_CASE("windows never intersect above the thm1 threshold", "[config]") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> uni(1.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> shells;
        int n = 1 + static_cast<int>(rng() % 2);
        for (int s = 0; s < 1 + static_cast<int>(rng() % 3); ++s) {
            shells.push_back(n);
            n += 1 + static_cast<int>(rng() % 2);
        }
        auto cfg = uhf(1.0, 1 + static_cast<int>(rng() % 2), shells);
        cfg.z = z_thresholds(cfg).z_threshold_thm1 * uni(rng);
        auto w = build_window(cfg); // must not throw
        for (std::size_t k = 0; k + 1 < w.intervals.size(); ++k)
            CHECK(w.intervals[k].hi < w.intervals[k + 1].lo);
        CHECK(w.intervals.back().hi < 0.0);
    }
}
