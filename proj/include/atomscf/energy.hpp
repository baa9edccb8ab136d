#pragma once

#include "atomscf/angular.hpp"
#include "atomscf/density.hpp"
#include "atomscf/operators.hpp"

#include <vector>

namespace atomscf {

struct HfEnergyBreakdown {
    double one_body = 0.0;    // tr[(-Delta - V) P]
    double direct = 0.0;      // (1/2Z) int int rho rho V
    double exchange = 0.0;    // (1/2Z) int int |tau|^2 V
    double interaction = 0.0; // direct - exchange, >= 0
    double total = 0.0;
};

/// Rescaled Hartree-Fock energy  tr[(-Delta-V)P] + (1/2Z) iint (rho rho' - |tau|^2) V,
/// evaluated through the same multipole reduction as the operators.
inline HfEnergyBreakdown hf_energy_breakdown(const Configuration& cfg, const DensityState& state) {
    const RadialGrid& g = *state.grid;
    HfEnergyBreakdown e;

    for (auto& [ell, orbs] : state.channels) {
        ChannelOperator h0 = kinetic_nuclear_matrix(state.grid, ell);
        for (auto& o : orbs) {
            Vec v = g.to_scaled(o.u);
            e.one_body += state.occupancy(ell, o) * v.dot(h0.matrix * v);
        }
    }

    Vec rho = state.radial_density();
    Vec u_dir = hartree_potential(g, rho);
    e.direct = g.inner(u_dir, rho);

    // exchange: q * sum_{a,b} m_a m_b sum_k w3j^2(la k lb) * 2 * G^k(a,b),
    // G^k = int u_a u_b Y^k[u_a, u_b]
    double x = 0.0;
    for (auto& [la, orbs_a] : state.channels) {
        for (auto& oa : orbs_a) {
            double ma = state.exchange_mult(la, oa);
            for (auto& [lb, orbs_b] : state.channels) {
                for (auto& ob : orbs_b) {
                    double mb = state.exchange_mult(lb, ob);
                    for (int k : exchange_multipoles(la, lb)) {
                        double w3 = wigner3j000_sq(la, k, lb);
                        if (w3 == 0.0) continue;
                        Vec yk = slater_yk(g, oa.u, ob.u, k);
                        double gk = g.inner(oa.u.cwiseProduct(ob.u), yk);
                        x += ma * mb * w3 * 2.0 * gk;
                    }
                }
            }
        }
    }
    e.exchange = state.spin_factor * x;
    e.interaction = e.direct - e.exchange;
    e.total = e.one_body + 0.5 * (e.direct - e.exchange) / cfg.z;
    return e;
}

inline double hf_energy(const Configuration& cfg, const DensityState& state) {
    return hf_energy_breakdown(cfg, state).total;
}

/// Unscaled Hartree energy of independent normalized s-orbitals on a grid:
/// sum_k <u_k| -d^2/dr^2 - 2z/r |u_k> + sum_{i<k} iint rho_i rho_k 2/|x-y|.
/// No orthogonality assumed.
inline double hartree_energy(double z, const std::vector<Vec>& orbitals,
                             const std::shared_ptr<const RadialGrid>& grid_ptr) {
    const RadialGrid& grid = *grid_ptr;
    double e = 0.0;
    ChannelOperator h = kinetic_nuclear_matrix(grid_ptr, 0, z);
    std::vector<Vec> pots;
    pots.reserve(orbitals.size());
    for (auto& u : orbitals) {
        Vec v = grid.to_scaled(u);
        e += v.dot(h.matrix * v);
        pots.push_back(hartree_potential(grid, u.cwiseProduct(u)));
    }
    for (std::size_t i = 0; i < orbitals.size(); ++i)
        for (std::size_t k = i + 1; k < orbitals.size(); ++k)
            e += grid.inner(pots[i], orbitals[k].cwiseProduct(orbitals[k]));
    return e;
}

} // namespace atomscf
