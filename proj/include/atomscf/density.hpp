#pragma once

#include "atomscf/common.hpp"
#include "atomscf/config.hpp"
#include "atomscf/grid.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <memory>
#include <vector>

namespace atomscf {

/// One radial orbital of a rotation-invariant density operator: the full
/// (2l+1)-fold m-subshell (times the spin factor) sharing the radial part u.
struct ChannelOrbital {
    Vec u;            // radial function, grid samples, normalized in the grid quadrature
    double lambda = 1.0; // radial occupation in (0,1]; < 1 only for damped mixtures
    int n_label = 0;     // principal number this orbital tracks (0 = unlabeled)
    double eps = 0.0;    // last known channel eigenvalue (diagnostic)
};

/// Reduced density operator P as per-channel orthonormal radial orbitals.
/// Occupancy of an entry is lambda * (2l+1) * spin_factor; the trace condition
/// sum = N is the S_{N,q} constraint.
struct DensityState {
    std::shared_ptr<const RadialGrid> grid;
    int spin_factor = 1;
    double n_electrons = 0.0;
    std::map<int, std::vector<ChannelOrbital>> channels;

    double occupancy(int ell, const ChannelOrbital& o) const {
        return o.lambda * (2 * ell + 1) * spin_factor;
    }

    double trace() const {
        double s = 0.0;
        for (auto& [ell, orbs] : channels)
            for (auto& o : orbs) s += occupancy(ell, o);
        return s;
    }

    /// Radial weight function rho_w with  integral rho_w dr = trace.
    Vec radial_density() const {
        Vec rho = Vec::Zero(grid->size());
        for (auto& [ell, orbs] : channels)
            for (auto& o : orbs) rho += occupancy(ell, o) * o.u.cwiseProduct(o.u);
        return rho;
    }

    /// Spinless per-orbital multiplicity lambda*(2l+1), the weight exchange uses.
    double exchange_mult(int ell, const ChannelOrbital& o) const { return o.lambda * (2 * ell + 1); }
};

/// Orthonormality and trace checks; max deviation returned through the pointers.
inline bool check_state_invariants(const DensityState& s, double* ortho_dev = nullptr,
                                   double* trace_dev = nullptr) {
    const RadialGrid& g = *s.grid;
    double worst = 0.0;
    for (auto& [ell, orbs] : s.channels) {
        for (std::size_t i = 0; i < orbs.size(); ++i) {
            if (!(orbs[i].lambda > 0.0) || orbs[i].lambda > 1.0 + 1e-12)
                throw symmetry_error("channel orbital occupation outside (0,1]");
            for (std::size_t j = 0; j <= i; ++j) {
                double ov = g.inner(orbs[i].u, orbs[j].u);
                worst = std::max(worst, std::abs(ov - (i == j ? 1.0 : 0.0)));
            }
        }
    }
    double tdev = std::abs(s.trace() - s.n_electrons);
    if (ortho_dev) *ortho_dev = worst;
    if (trace_dev) *trace_dev = tdev;
    return worst <= 1e-8 && tdev <= 1e-9;
}

/// Convex blend theta*a + (1-theta)*b of two density operators, re-diagonalized
/// per channel so the orbital list stays orthonormal.  Blending is the damping
/// primitive; S_{N,q} is convex so the result stays admissible.
inline DensityState blend_states(const DensityState& a, const DensityState& b, double theta) {
    if (a.spin_factor != b.spin_factor || a.grid != b.grid)
        throw std::invalid_argument("blend_states: structure mismatch");
    const RadialGrid& g = *a.grid;
    DensityState out;
    out.grid = a.grid;
    out.spin_factor = a.spin_factor;
    out.n_electrons = a.n_electrons;

    std::set<int> ells;
    for (auto& [e, _] : a.channels) ells.insert(e);
    for (auto& [e, _] : b.channels) ells.insert(e);

    for (int ell : ells) {
        std::vector<const ChannelOrbital*> vecs;
        std::vector<double> wts;
        auto ia = a.channels.find(ell);
        auto ib = b.channels.find(ell);
        if (ia != a.channels.end())
            for (auto& o : ia->second) { vecs.push_back(&o); wts.push_back(theta * o.lambda); }
        if (ib != b.channels.end())
            for (auto& o : ib->second) { vecs.push_back(&o); wts.push_back((1.0 - theta) * o.lambda); }
        if (vecs.empty()) continue;

        // Orthonormal basis of the joint span (modified Gram-Schmidt in the grid metric)
        std::vector<Vec> basis;
        for (auto* o : vecs) {
            Vec v = o->u;
            for (auto& q : basis) v -= g.inner(q, v) * q;
            for (auto& q : basis) v -= g.inner(q, v) * q;
            double nn = g.norm(v);
            if (nn > 1e-7) basis.push_back(v / nn);
        }
        const int m = static_cast<int>(basis.size());
        if (m == 0) continue;
        Mat dm = Mat::Zero(m, m);
        for (std::size_t t = 0; t < vecs.size(); ++t) {
            Eigen::VectorXd c(m);
            for (int j = 0; j < m; ++j) c[j] = g.inner(basis[static_cast<std::size_t>(j)], vecs[t]->u);
            dm += wts[t] * c * c.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(dm);
        for (int j = m - 1; j >= 0; --j) {
            double lam = es.eigenvalues()[j];
            if (lam < 1e-12) continue;
            Vec u = Vec::Zero(g.size());
            for (int t = 0; t < m; ++t) u += es.eigenvectors()(t, j) * basis[static_cast<std::size_t>(t)];
            ChannelOrbital o;
            o.u = u / g.norm(u);
            o.lambda = std::min(lam, 1.0);
            out.channels[ell].push_back(std::move(o));
        }
    }
    return out;
}

} // namespace atomscf
