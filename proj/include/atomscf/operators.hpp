#pragma once

#include "atomscf/angular.hpp"
#include "atomscf/common.hpp"
#include "atomscf/config.hpp"
#include "atomscf/density.hpp"
#include "atomscf/grid.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace atomscf {

/// Symmetric matrix acting on radial functions of fixed angular momentum, in
/// the scaled representation v = u .* sqrt(w) (so plain l2 orthonormality of
/// eigenvectors is orthonormality in the grid quadrature).
struct ChannelOperator {
    int ell = 0;
    std::shared_ptr<const RadialGrid> grid;
    Mat matrix;

    double op_norm_estimate() const { return matrix.cwiseAbs().rowwise().sum().maxCoeff(); }
    double symmetry_deviation() const {
        double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
        return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() / scale;
    }
};

namespace detail {

/// Derivative-at-midpoint stencil coefficients: exact for polynomials of
/// degree < n_nodes on the offsets (in units of h) relative to the midpoint.
inline std::vector<double> midpoint_deriv_coeffs(const std::vector<double>& offsets) {
    const int m = static_cast<int>(offsets.size());
    Mat a(m, m);
    Vec b = Vec::Zero(m);
    double fact = 1.0;
    for (int p = 0; p < m; ++p) {
        if (p > 0) fact *= p;
        for (int k = 0; k < m; ++k) a(p, k) = std::pow(offsets[static_cast<std::size_t>(k)], p) / fact;
        if (p == 1) b[p] = 1.0;
    }
    Vec c = a.fullPivLu().solve(b);
    return {c.data(), c.data() + m};
}

constexpr int kStencil = 8; // staggered first-derivative order

} // namespace detail

/// Kinetic + centrifugal form matrix in the scaled representation.
///
/// Assembled as the Sturm-Liouville form  integral r^{2l+2} v'(r)^2 dr  of the
/// reduced function v = u / r^{l+1}, which equals  integral u'^2 + l(l+1) u^2/r^2
/// exactly and is regular at r = 0 (the Dirichlet end of the domain, reached by
/// the grid map at t = 0).  Staggered 8th-order differences at cell midpoints;
/// stencils shift near the ends where the reduced function continues by zero.
inline Mat kinetic_form_matrix(const RadialGrid& g, int ell) {
    const int n = g.size();
    const double h = g.h;
    const int half = detail::kStencil / 2;
    Mat k = Mat::Zero(n, n);

    // node indices are 1-based in map parameter space; node 0 is t = 0 (v weightless there:
    // the t=0 node carries zero weight r^{2l+2}, so it is simply excluded)
    for (int c = 1; c <= n; ++c) { // cell c between nodes c and c+1
        int lo = c + 1 - half, hi = c + half;
        if (lo < 1) { hi += 1 - lo; lo = 1; }
        std::vector<double> offs;
        offs.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (int node = lo; node <= hi; ++node) offs.push_back(node - (c + 0.5));
        auto co = detail::midpoint_deriv_coeffs(offs);

        double p_mid = std::pow(g.r_mid[c - 1], 2 * ell + 2);
        double coef = h * p_mid / g.jac_mid[c - 1];
        for (int a = 0; a < static_cast<int>(co.size()); ++a) {
            int na = lo + a;
            if (na > n) continue; // beyond r_max: zero extension
            for (int b = 0; b <= a; ++b) {
                int nb = lo + b;
                if (nb > n) continue;
                double v = coef * (co[static_cast<std::size_t>(a)] / h) * (co[static_cast<std::size_t>(b)] / h);
                k(na - 1, nb - 1) += v;
                if (na != nb) k(nb - 1, na - 1) += v;
            }
        }
    }
    // scale by the channel weight W_l = w * r^{2l+2}
    Vec sw(n);
    for (int i = 0; i < n; ++i) sw[i] = std::sqrt(g.weights[i]) * std::pow(g.points[i], ell + 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) k(i, j) /= sw[i] * sw[j];
    return k;
}

/// Nuclear attraction -2 z_coef / r as a diagonal-plus-corrections matrix in the
/// scaled representation.  The two first-node corrections account for the
/// Coulomb weight of the sub-edge region (0, r(h/2)] and for the Euler-Maclaurin
/// boundary term of the midpoint quadrature at t = 0.
inline Mat nuclear_matrix(const RadialGrid& g, int ell, double z_coef = 1.0) {
    const int n = g.size();
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = -2.0 * z_coef / g.points[i];
    double wl1 = g.weights[0] * std::pow(g.points[0], 2 * ell + 2);
    double re = g.r_edge, rpe = g.jac_edge, rppe = g.jac2_edge;
    m(0, 0) += -z_coef * std::pow(re, 2 * ell + 2) / ((ell + 1) * wl1);
    double gq = 2.0 * z_coef * ((2 * ell + 1) * std::pow(re, 2 * ell) * rpe * rpe +
                                std::pow(re, 2 * ell + 1) * rppe);
    m(0, 0) += (g.h * g.h / 24.0) * gq / wl1;
    return m;
}

/// -d^2/dr^2 + l(l+1)/r^2 - 2 z_coef / r with Dirichlet ends, lowest eigenvalues
/// near -z_coef^2/n^2 for n >= l+1 (exactly -1/n^2 in the rescaled z_coef = 1 units).
inline ChannelOperator kinetic_nuclear_matrix(const std::shared_ptr<const RadialGrid>& grid, int ell,
                                              double z_coef = 1.0) {
    if (ell < 0) throw std::invalid_argument("kinetic_nuclear_matrix: ell must be >= 0");
    ChannelOperator op;
    op.ell = ell;
    op.grid = grid;
    op.matrix = kinetic_form_matrix(*grid, ell) + nuclear_matrix(*grid, ell, z_coef);
    return op;
}

/// Kinetic-plus-centrifugal only (the discrete -Laplacian on the channel).
inline ChannelOperator kinetic_only_matrix(const std::shared_ptr<const RadialGrid>& grid, int ell) {
    ChannelOperator op;
    op.ell = ell;
    op.grid = grid;
    op.matrix = kinetic_form_matrix(*grid, ell);
    return op;
}

// --- Coulomb integrals -------------------------------------------------------

namespace detail {

/// Diagonal kink-correction coefficient of the symmetric min/max kernel rule:
/// the integrand's t-slope jumps by -(2k+1)/r^2 * fg * r'^2 at s = r.
inline double kink_coeff(const RadialGrid& g, int i, int k) {
    double r = g.points[i], rp = g.jac[i];
    return (g.h * g.h / 12.0) * (-(2.0 * k + 1.0) / (r * r)) * rp * rp;
}

} // namespace detail

/// Screened multipole potential Y^k[f,g](r) = r^-(k+1) int_0^r s^k f g ds
///                                          + r^k int_r^inf f g / s^(k+1) ds,
/// evaluated with the same symmetric quadrature the exchange matrix uses.
inline Vec slater_yk(const RadialGrid& g, const Vec& f, const Vec& gg, int k) {
    const int n = g.size();
    Vec fg = f.cwiseProduct(gg);
    Vec y(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += g.weights[i] * std::pow(g.points[i], k) * fg[i];
        y[i] = acc * std::pow(g.points[i], -(k + 1));
    }
    double tail = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        y[i] += tail * std::pow(g.points[i], k);
        tail += g.weights[i] * fg[i] * std::pow(g.points[i], -(k + 1));
    }
    for (int i = 0; i < n; ++i) y[i] += detail::kink_coeff(g, i, k) * fg[i];
    return y;
}

/// Direct (Hartree) potential U = rho * V with V(x) = 2/|x|:
/// U(r) = 2 [ (1/r) int_0^r rho + int_r^inf rho/s ].  Tail: r U(r) -> 2N.
inline Vec hartree_potential(const RadialGrid& g, const Vec& rho_w) {
    const int n = g.size();
    Vec u(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += g.weights[i] * rho_w[i];
        u[i] = acc / g.points[i];
    }
    double tail = 0.0;
    for (int i = n - 1; i >= 0; --i) {
        u[i] += tail;
        tail += g.weights[i] * rho_w[i] / g.points[i];
    }
    for (int i = 0; i < n; ++i) u[i] = 2.0 * (u[i] + detail::kink_coeff(g, i, 0) * rho_w[i]);
    return u;
}

/// Exchange operator applied to a channel-l radial function:
/// (K u)(r) = sum_occ sum_k Lambda_k(l,l') * 2 * Y^k[u_b, u](r) * u_b(r).
/// Couples like spins only, so the multiplicities are the spinless (2l'+1).
inline void require_filled_subshells(const DensityState& state) {
    for (auto& [lb, orbs] : state.channels)
        for (auto& o : orbs)
            if (!(o.lambda > 0.0) || o.lambda > 1.0 + 1e-12)
                throw symmetry_error("exchange needs rotation-invariant states: channel occupation "
                                     "outside (0,1] breaks the filled m-subshell structure");
}

inline Vec exchange_apply(const DensityState& state, int ell, const Vec& u) {
    const RadialGrid& g = *state.grid;
    require_filled_subshells(state);
    Vec out = Vec::Zero(g.size());
    for (auto& [lb, orbs] : state.channels) {
        for (auto& o : orbs) {
            double mult = state.exchange_mult(lb, o);
            for (int k : exchange_multipoles(ell, lb)) {
                double lam = mult * wigner3j000_sq(ell, k, lb);
                if (lam == 0.0) continue;
                out += (2.0 * lam) * slater_yk(g, o.u, u, k).cwiseProduct(o.u);
            }
        }
    }
    return out;
}

/// Exchange operator as a symmetric matrix in the scaled representation.
/// Identical quadrature to exchange_apply / hartree_potential, which makes the
/// rank-one self-interaction cancellation (U - K) phi = 0 exact by construction.
inline Mat exchange_matrix(const DensityState& state, int ell) {
    const RadialGrid& g = *state.grid;
    require_filled_subshells(state);
    const int n = g.size();
    Mat kx = Mat::Zero(n, n);
    Vec sw = g.weights.array().sqrt();
    for (auto& [lb, orbs] : state.channels) {
        for (auto& o : orbs) {
            double mult = state.exchange_mult(lb, o);
            Vec ubs = o.u.cwiseProduct(sw);
            for (int k : exchange_multipoles(ell, lb)) {
                double lam = 2.0 * mult * wigner3j000_sq(ell, k, lb);
                if (lam == 0.0) continue;
                Vec lo(n), hi(n); // min^k and 1/max^(k+1) factors
                for (int i = 0; i < n; ++i) {
                    lo[i] = std::pow(g.points[i], k);
                    hi[i] = 1.0 / (lo[i] * g.points[i]);
                }
                Vec a = ubs.cwiseProduct(lo), b = ubs.cwiseProduct(hi);
                for (int i = 0; i < n; ++i) {
                    double bi = lam * b[i];
                    for (int j = 0; j <= i; ++j) { // j <= i  =>  r_j <= r_i
                        double v = bi * a[j];
                        kx(i, j) += v;
                        if (i != j) kx(j, i) += v;
                    }
                    kx(i, i) += lam * detail::kink_coeff(g, i, k) * o.u[i] * o.u[i];
                }
            }
        }
    }
    return kx;
}

/// Rescaled Fock operator channel block:
/// H_P|_l = -d^2/dr^2 + l(l+1)/r^2 - 2/r + (1/Z)(U_P - K_P)
/// with U_P built from the full (spin-summed) density, so the direct term
/// carries the spin factor while exchange stays spinless.
inline ChannelOperator fock_channel(const Configuration& cfg, const DensityState& state, int ell) {
    auto grid = state.grid;
    ChannelOperator op = kinetic_nuclear_matrix(grid, ell);
    if (state.trace() > 0.0) {
        Vec u_dir = hartree_potential(*grid, state.radial_density());
        op.matrix += (1.0 / cfg.z) * u_dir.asDiagonal().toDenseMatrix();
        op.matrix -= (1.0 / cfg.z) * exchange_matrix(state, ell);
    }
    return op;
}

} // namespace atomscf
