#pragma once

#include "atomscf/config.hpp"
#include "atomscf/density.hpp"
#include "atomscf/energy.hpp"
#include "atomscf/spectral.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace atomscf {

struct IterationStep {
    double residual = 0.0; // hs distance ||P_k - F(P_k)||_2
    double step = 0.0;     // ||P_{k+1} - P_k||_2 (differs from residual under damping)
    double hf_energy = 0.0;
    std::vector<double> occupied_eigenvalues;
};

struct OccupiedLevel {
    int ell = 0;
    int n = 0;
    double eps = 0.0;
    double occupancy = 0.0;
    bool in_window = false;
    bool in_ev_bounds = false; // Eq. (ev-bounds) / (ev-Rbounds) membership, tracked separately
};

struct IterationReport {
    std::vector<IterationStep> iterates;
    bool converged = false;
    int iterations = 0;
    double final_residual = 0.0;
    double empirical_lipschitz = 0.0;   // sup of consecutive step ratios
    double theoretical_lipschitz = 0.0; // (8/(delta Z)) (1+sqrt(2N)) sqrt(2N)
    std::vector<OccupiedLevel> occupied;
    double hf_energy = 0.0;
};

/// Hydrogenic start: interaction-free channel eigenvectors in each occupied slot.
inline DensityState hydrogenic_state(const Configuration& cfg, const std::shared_ptr<const RadialGrid>& grid) {
    validate(cfg);
    DensityState s;
    s.grid = grid;
    s.spin_factor = cfg.spin_factor();
    s.n_electrons = cfg.n_electrons();
    for (int ell : active_channels(cfg)) {
        std::vector<int> ns; // principal numbers occupied in this channel
        if (cfg.mode == Mode::Restricted) {
            for (auto& [nn, ll] : cfg.shells_r)
                if (ll == ell) ns.push_back(nn);
        } else {
            for (int nn : cfg.shells_u)
                if (nn >= ell + 1) ns.push_back(nn);
        }
        if (ns.empty()) continue;
        int deepest = *std::max_element(ns.begin(), ns.end());
        auto pairs = channel_eigensolve(kinetic_nuclear_matrix(grid, ell), deepest - ell + 2);
        for (int nn : ns) {
            ChannelOrbital o;
            o.u = grid->from_scaled(pairs[static_cast<std::size_t>(nn - ell - 1)].vector);
            o.lambda = 1.0;
            o.n_label = nn;
            o.eps = pairs[static_cast<std::size_t>(nn - ell - 1)].value;
            s.channels[ell].push_back(std::move(o));
        }
    }
    return s;
}

/// Random admissible start: Haar-random orthonormal vectors in each channel's
/// span of the lowest 3*(occupied count) interaction-free eigenvectors.
inline DensityState random_state(const Configuration& cfg, const std::shared_ptr<const RadialGrid>& grid,
                                 std::mt19937_64& rng) {
    DensityState s;
    s.grid = grid;
    s.spin_factor = cfg.spin_factor();
    s.n_electrons = cfg.n_electrons();
    std::normal_distribution<double> gauss;
    for (int ell : active_channels(cfg)) {
        std::vector<int> ns;
        if (cfg.mode == Mode::Restricted) {
            for (auto& [nn, ll] : cfg.shells_r)
                if (ll == ell) ns.push_back(nn);
        } else {
            for (int nn : cfg.shells_u)
                if (nn >= ell + 1) ns.push_back(nn);
        }
        if (ns.empty()) continue;
        const int need = static_cast<int>(ns.size());
        const int span = std::min(grid->size(), 3 * need + 2);
        auto pairs = channel_eigensolve(kinetic_nuclear_matrix(grid, ell), span);
        Mat gmat(span, need);
        for (int i = 0; i < span; ++i)
            for (int j = 0; j < need; ++j) gmat(i, j) = gauss(rng);
        Eigen::HouseholderQR<Mat> qr(gmat);
        Mat q = qr.householderQ() * Mat::Identity(span, need);
        for (int j = 0; j < need; ++j) {
            Vec v = Vec::Zero(grid->size());
            for (int i = 0; i < span; ++i) v += q(i, j) * pairs[static_cast<std::size_t>(i)].vector;
            ChannelOrbital o;
            o.u = grid->from_scaled(v);
            o.lambda = 1.0;
            o.n_label = ns[static_cast<std::size_t>(j)];
            s.channels[ell].push_back(std::move(o));
        }
    }
    return s;
}

namespace detail {

inline bool in_ev_bounds(const Configuration& cfg, int n_label, double eps) {
    const double tol = 1e-9; // discretization floor, as for window edges
    if (cfg.mode == Mode::Restricted) {
        double lo = -1.0 / (n_label * n_label);
        return eps >= lo - tol && eps <= lo + 4.0 * cfg.n_electrons() / cfg.z + tol;
    }
    // unrestricted: eps in [-1/n^2, -1/(n+1)^2)
    double lo = -1.0 / (n_label * n_label);
    double hi = -1.0 / double((n_label + 1) * (n_label + 1));
    return eps >= lo - tol && eps < hi;
}

inline void collect_occupied(const Configuration& cfg, const DensityState& s, const SpectralWindow& win,
                             IterationReport& rep) {
    rep.occupied.clear();
    for (auto& [ell, orbs] : s.channels) {
        for (auto& o : orbs) {
            OccupiedLevel lv;
            lv.ell = ell;
            lv.n = o.n_label;
            lv.eps = o.eps;
            lv.occupancy = s.occupancy(ell, o);
            lv.in_window = win.contains(o.eps);
            lv.in_ev_bounds = in_ev_bounds(cfg, o.n_label, o.eps);
            rep.occupied.push_back(lv);
        }
    }
    std::sort(rep.occupied.begin(), rep.occupied.end(), [](auto& a, auto& b) {
        return a.eps < b.eps || (a.eps == b.eps && a.ell < b.ell);
    });
}

} // namespace detail

/// Iterate P -> chi_Omega(H_P) to a fixed point.  Damping blends density
/// operators (convexity of S_{N,q} keeps iterates admissible).
inline std::pair<DensityState, IterationReport> solve(const Configuration& cfg, const DensityState& start,
                                                      double tol = 1e-10, int max_iter = 50,
                                                      double damping = 0.0) {
    validate(cfg);
    if (damping < 0.0 || damping >= 1.0) throw invalid_config_error("solver.damping", "must be in [0,1)");
    SpectralWindow win = build_window(cfg);
    GapReport gr = z_thresholds(cfg);

    IterationReport rep;
    rep.theoretical_lipschitz = gr.contraction_bound;

    DensityState cur = start;
    DensityState mapped;
    double prev_step = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        mapped = spectral_projection_map(cfg, cur);
        IterationStep st;
        st.residual = distances(cur, mapped).hs;
        DensityState next = (damping > 0.0) ? blend_states(mapped, cur, 1.0 - damping) : mapped;
        st.step = (damping > 0.0) ? distances(cur, next).hs : st.residual;
        st.hf_energy = hf_energy(cfg, next);
        for (auto& [ell, orbs] : mapped.channels)
            for (auto& o : orbs) st.occupied_eigenvalues.push_back(o.eps);
        std::sort(st.occupied_eigenvalues.begin(), st.occupied_eigenvalues.end());
        rep.iterates.push_back(st);
        if (prev_step > 1e-300 && st.step > 0.0)
            rep.empirical_lipschitz = std::max(rep.empirical_lipschitz, st.step / prev_step);
        prev_step = st.step;
        cur = std::move(next);
        if (st.residual <= tol) {
            rep.converged = true;
            break;
        }
    }
    rep.iterations = static_cast<int>(rep.iterates.size());
    rep.final_residual = rep.iterates.empty() ? 0.0 : rep.iterates.back().residual;
    rep.hf_energy = rep.iterates.empty() ? 0.0 : rep.iterates.back().hf_energy;
    detail::collect_occupied(cfg, mapped, win, rep);
    return {cur, rep};
}

// --- multi-start uniqueness probe ---------------------------------------------

struct UniquenessReport {
    int n_starts = 0;
    int n_converged = 0;
    double max_pairwise_hs = 0.0;
    Mat pairwise_hs;
    bool exploratory = false; // Z below the uniqueness threshold
    std::vector<IterationReport> runs;
};

/// Smallest Z above which some uniqueness statement applies: Theorem 5(ii)
/// (the Theorem 1 bound) in restricted mode, the minimizer bound of Theorem 2
/// otherwise, improved by Theorem 3 in the Hartree case q = N.
inline double uniqueness_threshold(const Configuration& cfg) {
    auto gr = z_thresholds(cfg);
    if (cfg.mode == Mode::Restricted) return gr.z_threshold_thm1;
    double t = gr.z_threshold_thm2;
    if (cfg.q == cfg.n_electrons()) t = std::min(t, gr.z_threshold_thm3);
    return t;
}

inline UniquenessReport uniqueness_probe(const Configuration& cfg,
                                         const std::shared_ptr<const RadialGrid>& grid, int n_starts,
                                         std::uint64_t seed, double tol = 1e-10, int max_iter = 50,
                                         double damping = 0.0) {
    UniquenessReport rep;
    rep.n_starts = n_starts;
    rep.exploratory = !(cfg.z > uniqueness_threshold(cfg));
    std::mt19937_64 rng(seed);
    std::vector<DensityState> limits;
    for (int s = 0; s < n_starts; ++s) {
        DensityState st = (s == 0) ? hydrogenic_state(cfg, grid) : random_state(cfg, grid, rng);
        auto [sol, r] = solve(cfg, st, tol, max_iter, damping);
        if (r.converged) {
            ++rep.n_converged;
            limits.push_back(sol);
        }
        rep.runs.push_back(std::move(r));
    }
    const int m = static_cast<int>(limits.size());
    rep.pairwise_hs = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            double d = distances(limits[static_cast<std::size_t>(i)], limits[static_cast<std::size_t>(j)]).hs;
            rep.pairwise_hs(i, j) = rep.pairwise_hs(j, i) = d;
            rep.max_pairwise_hs = std::max(rep.max_pairwise_hs, d);
        }
    return rep;
}

// --- empirical contraction factor ----------------------------------------------

struct LipschitzReport {
    int n_pairs = 0;
    int n_used = 0;
    int n_skipped = 0; // window-count failures among sampled states
    double max_ratio = 0.0;
    double theoretical_bound = 0.0;
};

inline LipschitzReport lipschitz_estimate(const Configuration& cfg,
                                          const std::shared_ptr<const RadialGrid>& grid, int n_pairs,
                                          std::uint64_t seed) {
    LipschitzReport rep;
    rep.n_pairs = n_pairs;
    rep.theoretical_bound = z_thresholds(cfg).contraction_bound;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < n_pairs; ++t) {
        DensityState p = random_state(cfg, grid, rng);
        DensityState q = random_state(cfg, grid, rng);
        double dpq = distances(p, q).hs;
        if (dpq < 1e-13) continue;
        try {
            DensityState fp = spectral_projection_map(cfg, p);
            DensityState fq = spectral_projection_map(cfg, q);
            rep.max_ratio = std::max(rep.max_ratio, distances(fp, fq).hs / dpq);
            ++rep.n_used;
        } catch (const gap_violation_error&) {
            ++rep.n_skipped;
        }
    }
    return rep;
}

// --- large-Z limit study ---------------------------------------------------------

struct LimitPoint {
    double z = 0.0;
    double hs_distance = 0.0;      // ||P_Z - P_inf||_2
    double corollary_bound = 0.0;  // (4 sqrt2 / delta) (N/Z) (1 + sqrt(2N))
    int iterations = 0;
    bool converged = false;
};

struct LimitStudy {
    std::vector<LimitPoint> points;
    bool slope_defined = false;
    double slope = 0.0; // log-log regression of distance against Z
};

inline LimitStudy limit_study(Configuration cfg, const std::shared_ptr<const RadialGrid>& grid,
                              const std::vector<double>& z_values, double tol = 1e-10, int max_iter = 50) {
    LimitStudy out;
    for (double z : z_values) {
        cfg.z = z;
        DensityState inf_state = hydrogenic_state(cfg, grid);
        auto [sol, rep] = solve(cfg, inf_state, tol, max_iter, 0.0);
        LimitPoint pt;
        pt.z = z;
        pt.converged = rep.converged;
        pt.iterations = rep.iterations;
        pt.hs_distance = distances(sol, inf_state).hs;
        auto gr = z_thresholds(cfg);
        double n = cfg.n_electrons();
        pt.corollary_bound = gr.delta_valid
                                 ? (4.0 * std::sqrt(2.0) / gr.delta) * (n / z) * (1.0 + std::sqrt(2.0 * n))
                                 : std::numeric_limits<double>::infinity();
        out.points.push_back(pt);
    }
    std::vector<double> lx, ly;
    for (auto& p : out.points)
        if (p.converged && p.hs_distance > 0.0) {
            lx.push_back(std::log(p.z));
            ly.push_back(std::log(p.hs_distance));
        }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) { mx += lx[i]; my += ly[i]; }
        mx /= lx.size(); my /= ly.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        out.slope_defined = sxx > 0.0;
        if (out.slope_defined) out.slope = sxy / sxx;
    }
    return out;
}

} // namespace atomscf
