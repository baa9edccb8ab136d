#pragma once

#include "atomscf/angular.hpp"
#include "atomscf/common.hpp"
#include "atomscf/density.hpp"
#include "atomscf/operators.hpp"
#include "atomscf/spectral.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace atomscf {

struct OracleReport {
    std::string subject;
    double oracle_value = 0.0;
    double kernel_value = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    static OracleReport make(std::string subject, double oracle, double kernel, double tol) {
        OracleReport r;
        r.subject = std::move(subject);
        r.oracle_value = oracle;
        r.kernel_value = kernel;
        r.rel_error = std::abs(oracle - kernel) / std::max({std::abs(oracle), std::abs(kernel), 1e-300});
        r.tolerance = tol;
        r.pass = r.rel_error <= tol;
        return r;
    }
};

/// Exponential-type radial shape u(r) = c r^p exp(-zeta r).
struct OrbitalShape {
    int ell = 0;
    int p = 1; // power, >= ell+1
    double zeta = 1.0;
    double norm = 1.0;

    double operator()(double r) const { return norm * std::pow(r, p) * std::exp(-zeta * r); }

    Vec sample(const RadialGrid& g) const {
        Vec u(g.size());
        for (int i = 0; i < g.size(); ++i) u[i] = (*this)(g.points[i]);
        return u / std::sqrt((g.weights.array() * u.array().square()).sum());
    }
};

namespace oracle_detail {

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(static_cast<std::size_t>(n), 0.0);
    w.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p1 = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[static_cast<std::size_t>(i)] = t;
        w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

/// Geometric panels covering (0, R], Gauss-Legendre nodes per panel; integrals
/// split at an interior kink subdivide the straddling panel so no node crosses it.
class PanelQuadrature {
  public:
    PanelQuadrature(double r_max, int n_panels = 24, int nodes = 16)
        : r_max_(r_max), n_panels_(n_panels) {
        gauss_legendre(nodes, gx_, gw_);
    }

    double integrate(const std::function<double(double)>& f) const {
        double s = 0.0;
        for_each_panel([&](double a, double b) { s += segment(a, b, f); });
        return s;
    }

    double integrate_split(double r, const std::function<double(double)>& f_below,
                           const std::function<double(double)>& f_above) const {
        double s = 0.0;
        for_each_panel([&](double a, double b) {
            if (b <= r)
                s += segment(a, b, f_below);
            else if (a >= r)
                s += segment(a, b, f_above);
            else {
                s += segment(a, r, f_below);
                s += segment(r, b, f_above);
            }
        });
        return s;
    }

  private:
    template <class F> void for_each_panel(F&& body) const {
        double lo = 0.0;
        for (int p = 0; p < n_panels_; ++p) {
            double hi = (p == n_panels_ - 1) ? r_max_ : r_max_ * std::pow(2.0, p + 1 - n_panels_);
            body(lo, hi);
            lo = hi;
        }
    }

    double segment(double a, double b, const std::function<double(double)>& f) const {
        if (b <= a) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < gx_.size(); ++i)
            s += 0.5 * (b - a) * gw_[i] * f(0.5 * (b - a) * gx_[i] + 0.5 * (b + a));
        return s;
    }

    double r_max_;
    int n_panels_;
    std::vector<double> gx_, gw_;
};

/// Theta part of the complex spherical harmonic, normalized so that
/// int Theta_lm(mu)^2 dmu = 1 (the 1/sqrt(2pi) azimuthal factor is tracked
/// separately; Condon-Shortley phases drop out of the squares used here).
inline double theta_lm(int l, int m, double x) {
    m = std::abs(m);
    double pmm = 1.0;
    if (m > 0) {
        double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
        double fact = 1.0;
        for (int i = 1; i <= m; ++i) {
            pmm *= -fact * somx2;
            fact += 2.0;
        }
    }
    double plm;
    if (l == m)
        plm = pmm;
    else {
        double pmmp1 = x * (2 * m + 1) * pmm;
        if (l == m + 1)
            plm = pmmp1;
        else {
            plm = 0.0;
            for (int ll = m + 2; ll <= l; ++ll) {
                plm = ((2 * ll - 1) * x * pmmp1 - (ll + m - 1) * pmm) / (ll - m);
                pmm = pmmp1;
                pmmp1 = plm;
            }
        }
    }
    double logn = 0.5 * (std::log((2.0 * l + 1.0) / 2.0) + std::lgamma(double(l - m) + 1.0) -
                         std::lgamma(double(l + m) + 1.0));
    return std::exp(logn) * plm;
}

/// theta-integral int Theta_{l1 m1} Theta_{l2 m2} Theta_{l3 m3} dmu by
/// Gauss-Legendre quadrature, exact for these polynomial integrands.
inline double theta_triple(int l1, int m1, int l2, int m2, int l3, int m3) {
    std::vector<double> gx, gw;
    gauss_legendre(2 + (l1 + l2 + l3) / 2 + 8, gx, gw);
    double s = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i)
        s += gw[i] * theta_lm(l1, m1, gx[i]) * theta_lm(l2, m2, gx[i]) * theta_lm(l3, m3, gx[i]);
    return s;
}

/// |int conj(Y_{la ma}) Y_{kq} Y_{lb mb} dOmega|^2 with q = ma - mb.
inline double gaunt_sq(int la, int ma, int k, int lb, int mb) {
    int q = ma - mb;
    if (std::abs(q) > k) return 0.0;
    double t = theta_triple(la, ma, k, q, lb, mb);
    return t * t / (2.0 * M_PI);
}

} // namespace oracle_detail

struct CoulombOracleResult {
    double direct = 0.0;   // m-summed filled-subshell direct integral, V = 2/|x-y|
    double exchange = 0.0; // m-summed filled-subshell exchange integral
    std::vector<std::pair<int, double>> exchange_by_k;
};

/// Two-electron integrals for exponential-type filled subshells, evaluated by
/// Legendre expansion of 1/|x-y| with the angular integration done numerically
/// per (l,m) and all m summed explicitly.  Fully independent of the production
/// Lambda_k table and of the grid quadrature.
inline CoulombOracleResult coulomb_oracle(OrbitalShape a, OrbitalShape b) {
    if (a.ell > 2 || b.ell > 2) throw std::invalid_argument("coulomb_oracle: ell <= 2 only");
    using namespace oracle_detail;

    double r_cut = 45.0 / std::min(a.zeta, b.zeta);
    PanelQuadrature quad(r_cut);

    auto normalize = [&](OrbitalShape& s) {
        s.norm = 1.0;
        s.norm = 1.0 / std::sqrt(quad.integrate([&](double r) { return s(r) * s(r); }));
    };
    normalize(a);
    normalize(b);

    auto radial_rk = [&](const std::function<double(double)>& fr, const std::function<double(double)>& fs,
                         int k) {
        return quad.integrate([&](double r) {
            double inner = quad.integrate_split(
                r, [&](double s) { return fs(s) * std::pow(s / r, k) / r; },
                [&](double s) { return fs(s) * std::pow(r / s, k) / s; });
            return fr(r) * inner;
        });
    };

    CoulombOracleResult out;

    // direct: per-m angular factors (1/sqrt(2pi)) S with S the theta integral of
    // Theta^2 Theta_k0; the m sums kill every k but 0, which the explicit sums confirm
    for (int k = 0; k <= 2 * std::max(a.ell, b.ell); ++k) {
        double sum_a = 0.0, sum_b = 0.0;
        for (int ma = -a.ell; ma <= a.ell; ++ma) sum_a += theta_triple(a.ell, ma, a.ell, ma, k, 0);
        for (int mb = -b.ell; mb <= b.ell; ++mb) sum_b += theta_triple(b.ell, mb, b.ell, mb, k, 0);
        if (std::abs(sum_a * sum_b) < 1e-14) continue;
        double rk = radial_rk([&](double r) { return a(r) * a(r); },
                              [&](double s) { return b(s) * b(s); }, k);
        out.direct += 2.0 * rk * (2.0 / (2.0 * k + 1.0)) * sum_a * sum_b;
    }

    // exchange: X = 2 sum_k R^k (4pi/(2k+1)) sum_{ma,mb} |Gaunt|^2
    for (int k = 0; k <= a.ell + b.ell; ++k) {
        double ang = 0.0;
        for (int ma = -a.ell; ma <= a.ell; ++ma)
            for (int mb = -b.ell; mb <= b.ell; ++mb) ang += gaunt_sq(a.ell, ma, k, b.ell, mb);
        if (ang < 1e-14) continue;
        double rk = radial_rk([&](double r) { return a(r) * b(r); },
                              [&](double s) { return a(s) * b(s); }, k);
        double contrib = 2.0 * rk * (4.0 * M_PI / (2.0 * k + 1.0)) * ang;
        out.exchange += contrib;
        out.exchange_by_k.push_back({k, contrib});
    }
    return out;
}

// --- kernel-side counterparts (the gated production path) ---------------------

/// Filled-subshell direct integral through the production machinery:
/// (2la+1) int u_a^2 U_b with U_b = hartree_potential((2lb+1) u_b^2).
inline double kernel_direct_element(const RadialGrid& g, int la, const Vec& ua, int lb, const Vec& ub) {
    Vec rho_b = (2.0 * lb + 1.0) * ub.cwiseProduct(ub);
    Vec u_pot = hartree_potential(g, rho_b);
    return (2.0 * la + 1.0) * g.inner(u_pot, ua.cwiseProduct(ua));
}

/// Filled-subshell exchange integral through the production multipole
/// reduction; `lambda_scale` exists so the gate's sensitivity to a corrupted
/// angular table can be demonstrated (default 1 = production table).
inline double kernel_exchange_element(const RadialGrid& g, int la, const Vec& ua, int lb, const Vec& ub,
                                      double lambda_scale = 1.0) {
    double x = 0.0;
    for (int k : exchange_multipoles(la, lb)) {
        double lam = lambda_scale * exchange_lambda(la, lb, k);
        if (lam == 0.0) continue;
        Vec yk = slater_yk(g, ub, ua, k);
        x += lam * 2.0 * g.inner(ua.cwiseProduct(ub), yk);
    }
    return (2.0 * la + 1.0) * x;
}

/// The oracle gate: kernel direct/exchange subshell integrals against the
/// multipole-free oracle for a library of shapes.  Must pass before any solver
/// acceptance result is meaningful.
inline std::vector<OracleReport> coulomb_gate(const RadialGrid& g,
                                              const std::vector<std::pair<OrbitalShape, OrbitalShape>>& pairs,
                                              double tol = 1e-6, double lambda_scale = 1.0) {
    std::vector<OracleReport> out;
    int idx = 0;
    for (auto& [a, b] : pairs) {
        auto oracle = coulomb_oracle(a, b);
        Vec ua = a.sample(g), ub = b.sample(g);
        double kd = kernel_direct_element(g, a.ell, ua, b.ell, ub);
        double kx = kernel_exchange_element(g, a.ell, ua, b.ell, ub, lambda_scale);
        std::string tag = "pair" + std::to_string(idx++) + "(l=" + std::to_string(a.ell) + "," +
                          std::to_string(b.ell) + ")";
        out.push_back(OracleReport::make("coulomb_direct[" + tag + "]", oracle.direct, kd, tol));
        out.push_back(OracleReport::make("coulomb_exchange[" + tag + "]", oracle.exchange, kx, tol));
    }
    return out;
}

/// Default shape library for the gate: ten pairs covering (l,l') in
/// {(0,0),(0,1),(1,1)} and a spread of exponents and powers.
inline std::vector<std::pair<OrbitalShape, OrbitalShape>> default_gate_pairs() {
    std::vector<std::pair<OrbitalShape, OrbitalShape>> v;
    v.push_back({{0, 1, 1.0}, {0, 1, 1.0}});
    v.push_back({{0, 1, 1.0}, {0, 1, 2.2}});
    v.push_back({{0, 2, 1.3}, {0, 1, 0.7}});
    v.push_back({{0, 1, 1.6}, {0, 2, 0.9}});
    v.push_back({{0, 1, 1.0}, {1, 2, 0.5}});
    v.push_back({{0, 2, 1.1}, {1, 2, 0.9}});
    v.push_back({{0, 1, 0.8}, {1, 3, 1.2}});
    v.push_back({{1, 2, 0.5}, {1, 2, 0.5}});
    v.push_back({{1, 2, 0.9}, {1, 2, 1.5}});
    v.push_back({{1, 3, 1.1}, {1, 2, 0.6}});
    return v;
}

// --- random projection sweep (Prop. 4 oracle) ---------------------------------

struct SweepReport {
    int trials = 0;
    int violations = 0;
    double max_lhs_over_rhs = 0.0;
    bool pass = false;
};

/// Random symmetric pairs with enforced two-sided spectral gaps around the
/// window [-1/2, 1/2]; checks the projection-comparison inequality by exact
/// diagonalization.
inline SweepReport random_projection_sweep(int dim, int trials, std::uint64_t seed) {
    if (dim > 16) throw std::invalid_argument("random_projection_sweep: dim <= 16");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double lo = -0.5, hi = 0.5, margin = 0.05;

    auto random_orthogonal = [&](int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = gauss(rng);
        Eigen::HouseholderQR<Mat> qr(m);
        return Mat(qr.householderQ());
    };
    auto random_spectrum = [&](int n) {
        Vec ev(n);
        int inside = 1 + static_cast<int>(uni(rng) * (n - 1));
        for (int i = 0; i < n; ++i) {
            if (i < inside)
                ev[i] = lo + margin + uni(rng) * (hi - lo - 2 * margin);
            else {
                double off = margin + uni(rng) * 1.5;
                ev[i] = (uni(rng) < 0.5) ? lo - off : hi + off;
            }
        }
        return ev;
    };

    SweepReport rep;
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Mat qa = random_orthogonal(dim), qb = random_orthogonal(dim);
        Mat a = qa * random_spectrum(dim).asDiagonal() * qa.transpose();
        Mat b = qb * random_spectrum(dim).asDiagonal() * qb.transpose();
        auto r = projection_bound_check(0.5 * (a + a.transpose()), 0.5 * (b + b.transpose()), lo, hi);
        if (!r.holds) ++rep.violations;
        if (r.rhs > 0.0) rep.max_lhs_over_rhs = std::max(rep.max_lhs_over_rhs, r.lhs / r.rhs);
    }
    rep.pass = rep.violations == 0;
    return rep;
}

// --- discrete trace formula (Appendix lemma) -----------------------------------

struct TraceFormulaReport {
    double trace_identity_error = 0.0; // |int rho_K - tr K|
    double l1_excess = 0.0;            // int |rho_K| - tr|K| (must be <= tolerance)
    bool pass = false;
};

/// Random low-rank kernel K = sum c_i |f_i><g_i| on the grid; rho_K from the
/// singular-basis diagonal formula.  (i) int rho_K = tr K is an exact
/// finite-dimensional identity in the grid quadrature; (ii) int |rho_K| <= tr|K|.
inline TraceFormulaReport trace_formula_check(const std::shared_ptr<const RadialGrid>& grid, int rank,
                                              std::uint64_t seed, bool positive = false) {
    const RadialGrid& g = *grid;
    rank = std::min(rank, 10);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz(0.4, 2.5);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_int_distribution<int> up(1, 3);

    auto smooth = [&]() {
        Vec u = Vec::Zero(g.size());
        for (int t = 0; t < 3; ++t) {
            OrbitalShape s{0, up(rng), uz(rng), 1.0};
            u += uc(rng) * s.sample(g);
        }
        return Vec(u / g.norm(u));
    };

    Mat kt = Mat::Zero(g.size(), g.size());
    for (int i = 0; i < rank; ++i) {
        double c = positive ? std::abs(uc(rng)) + 0.1 : uc(rng);
        Vec f = smooth(), h = positive ? f : smooth();
        kt += c * g.to_scaled(f) * g.to_scaled(h).transpose();
    }

    Eigen::BDCSVD<Mat> svd(kt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec rho = Vec::Zero(g.size());
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double s = svd.singularValues()[i];
        if (s < 1e-14) continue;
        Vec phi = g.from_scaled(svd.matrixU().col(i));
        Vec psi = g.from_scaled(svd.matrixV().col(i));
        rho += s * phi.cwiseProduct(psi);
    }
    double tr_k = kt.trace();
    double tr_abs = svd.singularValues().sum();
    TraceFormulaReport rep;
    rep.trace_identity_error = std::abs(g.integrate(rho) - tr_k);
    rep.l1_excess = g.weights.dot(rho.cwiseAbs()) - tr_abs;
    rep.pass = rep.trace_identity_error <= 1e-10 * std::max(1.0, std::abs(tr_k)) && rep.l1_excess <= 1e-10;
    return rep;
}

} // namespace atomscf
