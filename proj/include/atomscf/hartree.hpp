#pragma once

#include "atomscf/common.hpp"
#include "atomscf/energy.hpp"
#include "atomscf/grid.hpp"
#include "atomscf/operators.hpp"

#include <lapacke.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace atomscf {

/// Result of a Hartree minimization.  Orbitals live on `grid`, which is the
/// rescaled (charge-1) radial grid r_tilde = Z * r; `energy` is the unscaled
/// Rydberg value and `energy_rescaled` = energy / Z^2 is the quantity the
/// Ruskai-Stillinger -1 bound refers to.
struct HartreeStartResult {
    std::string kind;            // "symmetric" | "segregated" | "random"
    double energy = 0.0;
    double energy_rescaled = 0.0;
    bool converged = false;
    int iterations = 0;
    double orbital_spread = 0.0;
};

struct HartreeSolution {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<Vec> orbitals; // N normalized radial s-type functions
    double energy = 0.0;
    double energy_rescaled = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    bool symmetric = false;      // all orbitals pairwise L2-close
    double orbital_spread = 0.0; // max pairwise L2 distance
    std::vector<HartreeStartResult> starts;
};

namespace detail {

constexpr int kFormBandwidth = 7; // 8-point staggered stencils couple |i-j| <= 7

/// Symmetric banded matrix, lower storage, column-major (kd+1) x n.
struct BandedSym {
    int n = 0, kd = 0;
    std::vector<double> ab;

    static BandedSym from_dense(const Mat& h, int kd) {
        BandedSym b;
        b.n = static_cast<int>(h.rows());
        b.kd = kd;
        b.ab.assign(static_cast<std::size_t>(kd + 1) * b.n, 0.0);
        for (int j = 0; j < b.n; ++j)
            for (int i = j; i <= std::min(b.n - 1, j + kd); ++i)
                b.ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (kd + 1)] = h(i, j);
        return b;
    }

    void add_diag(const Vec& d) {
        for (int j = 0; j < n; ++j) ab[static_cast<std::size_t>(j) * (kd + 1)] += d[j];
    }

    Vec matvec(const Vec& x) const {
        Vec y = Vec::Zero(n);
        for (int j = 0; j < n; ++j) {
            double xj = x[j];
            y[j] += ab[static_cast<std::size_t>(j) * (kd + 1)] * xj;
            for (int i = j + 1; i <= std::min(n - 1, j + kd); ++i) {
                double v = ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (kd + 1)];
                y[i] += v * xj;
                y[j] += v * x[i];
            }
        }
        return y;
    }
};

/// Lowest eigenpair by shifted inverse iteration on a banded LU factorization.
/// The first shift sits safely below the whole spectrum (H >= -1 in the
/// rescaled units); once the Rayleigh quotient settles, the shift tracks it
/// from below, which keeps the iteration locked on the ground state.
inline std::pair<double, Vec> banded_ground_state(const BandedSym& b, const Vec* warm = nullptr) {
    const int n = b.n, kl = b.kd, ku = b.kd, ldab = 2 * kl + ku + 1;
    std::vector<double> lu;
    std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
    double sigma = -2.0;
    auto factorize = [&](double sh) {
        lu.assign(static_cast<std::size_t>(ldab) * n, 0.0);
        for (int j = 0; j < n; ++j) {
            lu[static_cast<std::size_t>(kl + ku) + static_cast<std::size_t>(j) * ldab] =
                b.ab[static_cast<std::size_t>(j) * (b.kd + 1)] - sh;
            for (int i = j + 1; i <= std::min(n - 1, j + b.kd); ++i) {
                double v = b.ab[static_cast<std::size_t>(i - j) + static_cast<std::size_t>(j) * (b.kd + 1)];
                lu[static_cast<std::size_t>(kl + ku + i - j) + static_cast<std::size_t>(j) * ldab] = v;
                lu[static_cast<std::size_t>(kl + ku + j - i) + static_cast<std::size_t>(i) * ldab] = v;
            }
        }
        lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, lu.data(), ldab, ipiv.data());
        if (info < 0) throw std::runtime_error("banded_ground_state: dgbtrf failed");
    };
    factorize(sigma);

    Vec v = warm ? warm->normalized() : Vec::Ones(n).normalized();
    double lam = v.dot(b.matvec(v));
    for (int it = 0; it < 400; ++it) {
        lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, lu.data(), ldab,
                                         ipiv.data(), v.data(), n);
        if (info != 0) throw std::runtime_error("banded_ground_state: dgbtrs failed");
        v.normalize();
        Vec hv = b.matvec(v);
        lam = v.dot(hv);
        double resid = (hv - lam * v).norm();
        if (resid <= 1e-12 * (1.0 + std::abs(lam))) return {lam, v};
        // Rayleigh quotient never undershoots the ground state, so lambda - 2 resid
        // stays below it and the next factorization contracts quadratically
        if (it >= 6) {
            double target = lam - std::max(2.0 * resid, 1e-13 * (1.0 + std::abs(lam)));
            if (target > sigma + 1e-14) {
                sigma = target;
                factorize(sigma);
            }
        }
    }
    throw convergence_error("banded_ground_state: inverse iteration stalled");
}

/// Ground-state guard (LAPACK bisection, eigenvalue only): confirms the
/// inverse iteration did not lock onto an excited level.
inline double banded_lowest_eigenvalue(const BandedSym& b) {
    std::vector<double> ab(b.ab);
    std::vector<double> wv(static_cast<std::size_t>(b.n));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(b.n));
    lapack_int m = 0;
    lapack_int info = LAPACKE_dsbevx(LAPACK_COL_MAJOR, 'N', 'I', 'L', b.n, b.kd, ab.data(), b.kd + 1,
                                     nullptr, 1, 0.0, 0.0, 1, 1, 0.0, &m, wv.data(), nullptr, 1,
                                     ifail.data());
    if (info != 0 || m != 1) throw std::runtime_error("banded_lowest_eigenvalue: dsbevx failed");
    return wv[0];
}

inline Vec positive_normalized(const RadialGrid& g, Vec u) {
    u /= g.norm(u);
    int imax = 0;
    double best = 0.0;
    for (int i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) > best) { best = std::abs(u[i]); imax = i; }
    if (u[imax] < 0.0) u = -u;
    return u;
}

inline Vec sto_shape(const RadialGrid& g, double zeta) {
    Vec u(g.size());
    for (int i = 0; i < g.size(); ++i) u[i] = g.points[i] * std::exp(-zeta * g.points[i]);
    return positive_normalized(g, u);
}

} // namespace detail

/// Bound rescaled orbitals have O(1) extent regardless of Z, so a fixed
/// rescaled box works; segregation scans pass their enlarged grid explicitly.
inline std::shared_ptr<const RadialGrid> default_hartree_grid(int count = 1800) {
    return std::make_shared<RadialGrid>(build_grid(GridScheme::LogLinear, 60.0, count));
}

/// Restricted Hartree minimization: single orbital phi solving
/// (-Delta - 2Z/|x| + (N-1) U_phi) phi = eps phi, SCF with density damping.
inline HartreeSolution restricted_minimize(int n_electrons, double z, double tol = 1e-11,
                                           std::shared_ptr<const RadialGrid> grid = nullptr,
                                           int max_iter = 400, double damping = 0.35) {
    if (!(z > 0.0)) throw invalid_config_error("z", "must be positive");
    if (n_electrons < 1) throw invalid_config_error("n_electrons", "must be >= 1");
    if (!grid) grid = default_hartree_grid();
    const RadialGrid& g = *grid;

    auto band0 = detail::BandedSym::from_dense(kinetic_nuclear_matrix(grid, 0).matrix,
                                               detail::kFormBandwidth); // rescaled charge-1 Coulomb
    Vec u = detail::sto_shape(g, 1.0);
    Vec v = g.to_scaled(u);
    Vec rho = u.cwiseProduct(u);
    HartreeSolution sol;
    sol.grid = grid;
    double coupling = double(n_electrons - 1) / z;

    double diff = 0.0;
    int it = 0;
    detail::BandedSym h = band0;
    for (; it < max_iter; ++it) {
        h = band0;
        if (coupling != 0.0) h.add_diag(coupling * hartree_potential(g, rho));
        auto [eps, vt] = detail::banded_ground_state(h, &v);
        v = vt;
        Vec unew = detail::positive_normalized(g, g.from_scaled(vt));
        diff = g.norm(unew - u);
        u = unew;
        rho = (1.0 - damping) * u.cwiseProduct(u) + damping * rho;
        if (diff <= tol) { sol.converged = true; ++it; break; }
    }
    if (sol.converged) {
        double guard = detail::banded_lowest_eigenvalue(h);
        double found = g.to_scaled(u).dot(h.matvec(g.to_scaled(u)));
        if (found > guard + 1e-8 * (1.0 + std::abs(guard)))
            throw convergence_error("restricted_minimize: converged onto an excited level");
    }
    sol.iterations = it;
    sol.residual = diff;
    sol.orbitals.assign(static_cast<std::size_t>(n_electrons), u);
    double e = 0.0;
    {
        Vec vv = g.to_scaled(u);
        double h1 = vv.dot(band0.matvec(vv));
        Vec upot = hartree_potential(g, u.cwiseProduct(u));
        double j = g.inner(upot, u.cwiseProduct(u));
        e = n_electrons * h1 + 0.5 * n_electrons * (n_electrons - 1) * j / z;
    }
    sol.energy_rescaled = e;
    sol.energy = z * z * e;
    sol.symmetric = true;
    sol.orbital_spread = 0.0;
    return sol;
}

/// Unrestricted Hartree minimization over N independent radial orbitals; each
/// sees the direct potential of all the others.  Runs the requested starts
/// (symmetric, deliberately segregated, then seeded random exponents) and
/// returns the best energy.
inline HartreeSolution unrestricted_minimize(int n_electrons, double z, int n_starts = 2,
                                             double tol = 1e-11,
                                             std::shared_ptr<const RadialGrid> grid = nullptr,
                                             int max_iter = 600, double damping = 0.35,
                                             std::uint64_t seed = 7) {
    if (!(z > 0.0)) throw invalid_config_error("z", "must be positive");
    if (n_electrons < 1) throw invalid_config_error("n_electrons", "must be >= 1");
    if (!grid) grid = default_hartree_grid();
    const RadialGrid& g = *grid;
    const int n = n_electrons;

    auto band0 = detail::BandedSym::from_dense(kinetic_nuclear_matrix(grid, 0).matrix,
                                               detail::kFormBandwidth);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> zdist(0.3, 2.0);

    std::vector<std::pair<std::string, std::vector<Vec>>> starts;
    starts.push_back({"symmetric", std::vector<Vec>(static_cast<std::size_t>(n), detail::sto_shape(g, 1.0))});
    if (n_starts >= 2) {
        std::vector<Vec> seg(static_cast<std::size_t>(n), detail::sto_shape(g, 1.0));
        seg.back() = detail::sto_shape(g, 0.02 / z); // diffuse orbital around net charge Z-(N-1)
        starts.push_back({"segregated", std::move(seg)});
    }
    while (static_cast<int>(starts.size()) < n_starts) {
        std::vector<Vec> s;
        for (int k = 0; k < n; ++k) s.push_back(detail::sto_shape(g, zdist(rng)));
        starts.push_back({"random", std::move(s)});
    }

    HartreeSolution best;
    best.energy = std::numeric_limits<double>::infinity();
    for (auto& [start_kind, start] : starts) {
        std::vector<Vec> u = start;
        std::vector<Vec> vs;
        std::vector<Vec> rho;
        for (auto& uk : u) {
            rho.push_back(uk.cwiseProduct(uk));
            vs.push_back(g.to_scaled(uk));
        }
        bool conv = false;
        double diff = 0.0;
        int it = 0;
        std::vector<detail::BandedSym> hs(static_cast<std::size_t>(n), band0);
        for (; it < max_iter; ++it) {
            std::vector<Vec> unew(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) {
                Vec rho_others = Vec::Zero(g.size());
                for (int j = 0; j < n; ++j)
                    if (j != k) rho_others += rho[static_cast<std::size_t>(j)];
                auto& h = hs[static_cast<std::size_t>(k)];
                h = band0;
                if (n > 1) h.add_diag(hartree_potential(g, rho_others) / z);
                auto [eps, vt] = detail::banded_ground_state(h, &vs[static_cast<std::size_t>(k)]);
                vs[static_cast<std::size_t>(k)] = vt;
                unew[static_cast<std::size_t>(k)] = detail::positive_normalized(g, g.from_scaled(vt));
            }
            diff = 0.0;
            for (int k = 0; k < n; ++k)
                diff = std::max(diff, g.norm(unew[static_cast<std::size_t>(k)] - u[static_cast<std::size_t>(k)]));
            u = unew;
            for (int k = 0; k < n; ++k)
                rho[static_cast<std::size_t>(k)] = (1.0 - damping) * u[static_cast<std::size_t>(k)].cwiseProduct(
                                                       u[static_cast<std::size_t>(k)]) +
                                                   damping * rho[static_cast<std::size_t>(k)];
            if (diff <= tol) { conv = true; ++it; break; }
        }
        if (conv) {
            for (int k = 0; k < n; ++k) {
                double guard = detail::banded_lowest_eigenvalue(hs[static_cast<std::size_t>(k)]);
                Vec vv = g.to_scaled(u[static_cast<std::size_t>(k)]);
                double found = vv.dot(hs[static_cast<std::size_t>(k)].matvec(vv));
                if (found > guard + 1e-8 * (1.0 + std::abs(guard)))
                    throw convergence_error("unrestricted_minimize: converged onto an excited level");
            }
        }
        double e = 0.0;
        {
            std::vector<Vec> pots;
            for (auto& uk : u) {
                Vec vv = g.to_scaled(uk);
                e += vv.dot(band0.matvec(vv));
                pots.push_back(hartree_potential(g, uk.cwiseProduct(uk)));
            }
            for (int i = 0; i < n; ++i)
                for (int k = i + 1; k < n; ++k)
                    e += g.inner(pots[static_cast<std::size_t>(i)],
                                 u[static_cast<std::size_t>(k)].cwiseProduct(u[static_cast<std::size_t>(k)])) /
                         z;
        }
        HartreeStartResult sr;
        sr.kind = start_kind;
        sr.energy_rescaled = e;
        sr.energy = z * z * e;
        sr.converged = conv;
        sr.iterations = it;
        {
            double sp = 0.0;
            for (int i = 0; i < n; ++i)
                for (int k = i + 1; k < n; ++k)
                    sp = std::max(sp, g.norm(u[static_cast<std::size_t>(i)] - u[static_cast<std::size_t>(k)]));
            sr.orbital_spread = sp;
        }
        if (e < best.energy) {
            best.grid = grid;
            best.energy = e;
            best.converged = conv;
            best.iterations = it;
            best.residual = diff;
            best.orbitals = u;
        } else if (!best.grid) {
            best.grid = grid;
        }
        best.starts.push_back(std::move(sr));
    }
    best.energy_rescaled = best.energy;
    best.energy = z * z * best.energy_rescaled;
    double spread = 0.0;
    for (std::size_t i = 0; i < best.orbitals.size(); ++i)
        for (std::size_t k = i + 1; k < best.orbitals.size(); ++k)
            spread = std::max(spread, g.norm(best.orbitals[i] - best.orbitals[k]));
    best.orbital_spread = spread;
    best.symmetric = spread < 1e-6;
    return best;
}

struct SegregationRow {
    double z = 0.0;
    double restricted_energy = 0.0;
    double restricted_rescaled = 0.0;
    double unrestricted_energy = 0.0;
    double unrestricted_rescaled = 0.0;
    double gap = 0.0; // restricted - unrestricted (unscaled)
    bool segregated = false;
};

/// Phase-segregation scan near Z ~ 1: restricted vs best unrestricted N=2
/// energies per Z.  Uses the enlarged grid (r_max = 400 unscaled) so the
/// diffuse branch fits; the finite box still biases it upward slightly.
inline std::vector<SegregationRow> segregation_scan(const std::vector<double>& z_values,
                                                    int grid_count = 2200, double r_max_unscaled = 400.0) {
    std::vector<SegregationRow> rows;
    for (double z : z_values) {
        auto grid = std::make_shared<const RadialGrid>(
            build_grid(GridScheme::LogLinear, z * r_max_unscaled, grid_count));
        auto res = restricted_minimize(2, z, 1e-11, grid);
        auto unr = unrestricted_minimize(2, z, 2, 1e-11, grid);
        SegregationRow row;
        row.z = z;
        row.restricted_energy = res.energy;
        row.restricted_rescaled = res.energy_rescaled;
        row.unrestricted_energy = unr.energy;
        row.unrestricted_rescaled = unr.energy_rescaled;
        row.gap = res.energy - unr.energy;
        row.segregated = !unr.symmetric && row.gap > 1e-8;
        rows.push_back(row);
    }
    return rows;
}

} // namespace atomscf
