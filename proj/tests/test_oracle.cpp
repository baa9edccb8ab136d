#include <catch2/catch_amalgamated.hpp>

#include "atomscf/oracle.hpp"

using namespace atomscf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
std::shared_ptr<const RadialGrid> test_grid(int n = 1000) {
    static std::shared_ptr<const RadialGrid> g;
    if (!g || g->count != n) g = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 60.0, n));
    return g;
}
} // namespace

TEST_CASE("1s-1s direct integral is the classic 5/4", "[oracle]") {
    auto res = coulomb_oracle({0, 1, 1.0}, {0, 1, 1.0});
    CHECK_THAT(res.direct, WithinAbs(1.25, 1e-8));
    // identical orbitals: exchange equals direct
    CHECK_THAT(res.exchange, WithinAbs(res.direct, 1e-10));
}

TEST_CASE("1s-2p exchange uses only k = 1", "[oracle]") {
    auto res = coulomb_oracle({0, 1, 1.0}, {1, 2, 0.5});
    REQUIRE(res.exchange_by_k.size() == 1);
    CHECK(res.exchange_by_k[0].first == 1);
    CHECK(res.exchange > 0.0);
}

TEST_CASE("oracle gate: kernel matches the multipole-free path", "[oracle]") {
    auto grid = test_grid();
    auto reps = coulomb_gate(*grid, default_gate_pairs(), 1e-6);
    REQUIRE(reps.size() == 20);
    for (auto& r : reps) {
        INFO(r.subject << " oracle=" << r.oracle_value << " kernel=" << r.kernel_value
                       << " rel=" << r.rel_error);
        CHECK(r.pass);
    }
}

TEST_CASE("oracle gate detects a corrupted angular table", "[oracle]") {
    auto grid = test_grid();
    auto reps = coulomb_gate(*grid, {{OrbitalShape{0, 1, 1.0}, OrbitalShape{1, 2, 0.9}}}, 1e-6, 1.001);
    bool exchange_failed = false;
    for (auto& r : reps)
        if (r.subject.find("exchange") != std::string::npos && !r.pass) exchange_failed = true;
    CHECK(exchange_failed);
}

TEST_CASE("kernel exchange element agrees with the matrix quadratic form", "[oracle]") {
    auto grid = test_grid();
    OrbitalShape a{0, 1, 1.0}, b{1, 2, 0.8};
    Vec ua = a.sample(*grid), ub = b.sample(*grid);
    DensityState s;
    s.grid = grid;
    s.spin_factor = 1;
    s.n_electrons = 2 * b.ell + 1;
    s.channels[b.ell].push_back({ub, 1.0, 2, 0.0});
    Mat kx = exchange_matrix(s, a.ell);
    Vec v = grid->to_scaled(ua);
    double quad = (2.0 * a.ell + 1.0) * v.dot(kx * v);
    CHECK_THAT(quad, WithinRel(kernel_exchange_element(*grid, a.ell, ua, b.ell, ub), 1e-12));
}

TEST_CASE("random projection sweep finds no violations", "[oracle]") {
    auto r8 = random_projection_sweep(8, 300, 100);
    CHECK(r8.pass);
    CHECK(r8.violations == 0);
    auto r12 = random_projection_sweep(12, 200, 101);
    CHECK(r12.pass);
    CHECK_THROWS_AS(random_projection_sweep(32, 1, 1), std::invalid_argument);
}

TEST_CASE("commuting pairs satisfy the bound", "[oracle]") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> gauss;
    Mat m(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) m(i, j) = gauss(rng);
    Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ();
    Vec ea(6), eb(6);
    ea << -0.4, -0.2, 0.3, 0.8, 1.2, -1.4;
    eb << -0.35, -0.1, 0.25, 0.9, 1.5, -0.9;
    Mat a = q * ea.asDiagonal() * q.transpose();
    Mat b = q * eb.asDiagonal() * q.transpose();
    auto r = projection_bound_check(0.5 * (a + a.transpose()), 0.5 * (b + b.transpose()), -0.5, 0.5);
    CHECK(r.holds);
    CHECK_THAT(r.lhs, WithinAbs(0.0, 1e-12)); // same eigenvectors, same selection
}

TEST_CASE("rhs scales inversely with the gap", "[oracle]") {
    // fix A - B and the projections; shrink delta by widening nothing but the
    // outside spectrum's distance
    Mat a = Mat::Zero(3, 3), b = Mat::Zero(3, 3);
    a(0, 0) = 0.0; a(1, 1) = 0.6; a(2, 2) = 1.0;
    b(0, 0) = 0.05; b(1, 1) = 0.56; b(2, 2) = 1.1;
    auto r1 = projection_bound_check(a, b, -0.5, 0.5);
    // delta is set by |0.56 - 0.5|... move the outside eigenvalues 10x closer
    Mat a2 = a, b2 = b;
    a2(1, 1) = 0.5 + 0.1 * (a(1, 1) - 0.5);
    b2(1, 1) = 0.5 + 0.1 * (b(1, 1) - 0.5);
    auto r2 = projection_bound_check(a2, b2, -0.5, 0.5);
    CHECK(r2.delta < r1.delta);
    CHECK(r2.rhs > r1.rhs); // smaller gap, larger right-hand side
}

TEST_CASE("trace formula: rank-one kernels map to pointwise products", "[oracle]") {
    auto grid = test_grid();
    const RadialGrid& g = *grid;
    OrbitalShape sa{0, 1, 1.0}, sb{0, 2, 1.4};
    Vec f = sa.sample(g), h = sb.sample(g);
    Mat kt = g.to_scaled(f) * g.to_scaled(h).transpose();
    Eigen::BDCSVD<Mat> svd(kt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec rho = Vec::Zero(g.size());
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double s = svd.singularValues()[i];
        if (s < 1e-14) continue;
        rho += s * g.from_scaled(svd.matrixU().col(i)).cwiseProduct(g.from_scaled(svd.matrixV().col(i)));
    }
    CHECK((rho - f.cwiseProduct(h)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trace formula identities on random kernels", "[oracle]") {
    auto grid = test_grid();
    auto pos = trace_formula_check(grid, 3, 7, true);
    CHECK(pos.pass);
    CHECK(std::abs(pos.trace_identity_error) < 1e-12);
    CHECK(std::abs(pos.l1_excess) < 1e-10); // positive case: equality

    auto mixed = trace_formula_check(grid, 8, 8, false);
    CHECK(mixed.pass);
    CHECK(mixed.l1_excess <= 1e-10);
}

TEST_CASE("oracle runs are deterministic under a fixed seed", "[oracle]") {
    auto grid = test_grid();
    auto a = trace_formula_check(grid, 6, 99, false);
    auto b = trace_formula_check(grid, 6, 99, false);
    CHECK(a.trace_identity_error == b.trace_identity_error);
    CHECK(a.l1_excess == b.l1_excess);
    auto s1 = random_projection_sweep(10, 50, 5);
    auto s2 = random_projection_sweep(10, 50, 5);
    CHECK(s1.max_lhs_over_rhs == s2.max_lhs_over_rhs);
}
