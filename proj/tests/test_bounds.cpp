#include <catch2/catch_amalgamated.hpp>

#include "atomscf/bounds.hpp"
#include "atomscf/fixedpoint.hpp"

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

const DensityState& converged_helium() {
    static DensityState s = [] {
        auto grid = test_grid();
        auto [st, rep] = solve(helium(), hydrogenic_state(helium(), grid), 1e-11, 40, 0.0);
        REQUIRE(rep.converged);
        return st;
    }();
    return s;
}

} // namespace

TEST_CASE("sandwich upper bound arithmetic", "[bounds]") {
    // n=1 level: E_inf = -1, sqrt(E+1) = 0 -> bound -1 + 4/35
    double up1 = -1.0 + 2.0 * 2.0 / 35.0;
    CHECK_THAT(up1, WithinAbs(-0.885714285714, 1e-10));
    // n=2 level: -1/4 + 4/35 + (4/35) sqrt(3)/2
    double up2 = -0.25 + 4.0 / 35.0 + (4.0 / 35.0) * std::sqrt(0.75);
    CHECK_THAT(up2, WithinAbs(-0.0367, 2e-4));
}

TEST_CASE("converged helium satisfies the Prop. 2 sandwich with positive margin", "[bounds]") {
    auto reps = eigenvalue_sandwich(helium(), converged_helium(), 4, true);
    for (auto& r : reps) {
        INFO(r.name << " lhs=" << r.lhs << " rhs=" << r.rhs);
        CHECK(r.pass);
    }
    // occupied level margins strictly positive
    for (auto& r : reps)
        if (r.name.find("n=1") != std::string::npos) CHECK(r.margin > 0.0);
}

TEST_CASE("monotonicity half of the sandwich on random states", "[bounds]") {
    auto grid = test_grid();
    Configuration cfg;
    cfg.mode = Mode::Unrestricted;
    cfg.z = 45.0;
    cfg.q = 2;
    cfg.shells_u = {1, 2};
    std::mt19937_64 rng(23);
    for (int t = 0; t < 2; ++t) {
        auto s = random_state(cfg, grid, rng);
        auto reps = eigenvalue_sandwich(cfg, s, 3, false);
        for (auto& r : reps)
            if (r.name.rfind("sandwich_lower", 0) == 0) {
                INFO(r.name);
                CHECK(r.margin >= -1e-10);
            }
    }
}

TEST_CASE("Lemma 1 form estimates hold channelwise", "[bounds]") {
    auto& state = converged_helium();
    auto reps = form_estimate_checks(helium(), state, {0.5, 1.0}, {0, 1});
    for (auto& r : reps) {
        INFO(r.name << " min eig " << r.rhs);
        CHECK(r.pass);
    }
    CHECK_THROWS_AS(form_estimate_checks(helium(), state, {-0.5}, {0}), std::invalid_argument);
}

TEST_CASE("item (iii) with small epsilon keeps a positive margin", "[bounds]") {
    auto& state = converged_helium();
    auto reps = form_estimate_checks(helium(), state, {0.1}, {0});
    bool found = false;
    for (auto& r : reps)
        if (r.name.rfind("lemma1_iii", 0) == 0) {
            found = true;
            CHECK(r.rhs > 0.0);
        }
    CHECK(found);
}

TEST_CASE("H^1 estimates: identical states and rank-one pairs", "[bounds]") {
    auto grid = test_grid();
    const RadialGrid& g = *grid;

    auto sto = [&](double zeta) {
        Vec u(g.size());
        for (int i = 0; i < g.size(); ++i) u[i] = g.points[i] * std::exp(-zeta * g.points[i]);
        return Vec(u / g.norm(u));
    };
    auto rank_one = [&](double zeta) {
        DensityState s;
        s.grid = grid;
        s.spin_factor = 1;
        s.n_electrons = 1;
        s.channels[0].push_back({sto(zeta), 1.0, 1, 0.0});
        return s;
    };

    auto p = rank_one(1.0);
    std::vector<std::pair<int, Vec>> phis = {{0, sto(1.0)}};
    auto reps_same = h1_estimate_checks(p, p, phis);
    for (auto& r : reps_same) CHECK_THAT(r.lhs, WithinAbs(0.0, 1e-12));

    auto q = rank_one(2.0);
    auto reps = h1_estimate_checks(p, q, phis);
    for (auto& r : reps) {
        INFO(r.name << " lhs=" << r.lhs << " rhs=" << r.rhs);
        CHECK(r.pass);
        CHECK(r.margin > 0.0);
    }
}

TEST_CASE("H^1 estimates over random state/test-function triples", "[bounds]") {
    auto grid = test_grid(800);
    Configuration cfg;
    cfg.mode = Mode::Unrestricted;
    cfg.z = 80.0;
    cfg.q = 2;
    cfg.shells_u = {1, 2};
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uz(0.5, 2.0);
    int checked = 0;
    for (int t = 0; t < 25; ++t) {
        auto p = random_state(cfg, grid, rng);
        auto q = random_state(cfg, grid, rng);
        Vec phi(grid->size());
        double zeta = uz(rng);
        int ell = static_cast<int>(rng() % 2);
        for (int i = 0; i < grid->size(); ++i)
            phi[i] = std::pow(grid->points[i], ell + 1) * std::exp(-zeta * grid->points[i]);
        phi /= grid->norm(phi);
        auto reps = h1_estimate_checks(p, q, {{ell, phi}});
        for (auto& r : reps) {
            INFO(r.name << " lhs=" << r.lhs << " rhs=" << r.rhs);
            CHECK(r.pass);
            ++checked;
        }
    }
    CHECK(checked == 50);
}

TEST_CASE("virial identity at the converged fixed point", "[bounds]") {
    auto r = virial_check(helium(), converged_helium(), true);
    INFO("kinetic " << r.lhs << " |E| " << r.rhs);
    CHECK(r.applicable);
    CHECK(r.pass);
    CHECK(std::abs(r.lhs - r.rhs) <= 1e-4 * r.rhs);
}

TEST_CASE("virial report off a fixed point is flagged not applicable", "[bounds]") {
    auto grid = test_grid();
    auto s = hydrogenic_state(helium(), grid);
    auto r = virial_check(helium(), s, false);
    CHECK_FALSE(r.applicable);
    CHECK(r.pass); // produced, not graded
}

TEST_CASE("kinetic trace bounds from the contraction proof", "[bounds]") {
    auto reps = kinetic_trace_bounds(helium(), converged_helium(), true);
    REQUIRE(reps.size() == 2);
    CHECK(reps[0].pass); // <= 4N
    CHECK(reps[1].pass); // <= N at solutions
}
