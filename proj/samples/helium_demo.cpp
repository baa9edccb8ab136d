// Minimal library walkthrough: solve the helium-like Z = 35 fixed point and
// print the occupied level against its spectral window.

#include "atomscf/fixedpoint.hpp"
#include "atomscf/io.hpp"

#include <cstdio>

int main() {
    using namespace atomscf;
    Configuration cfg;
    cfg.mode = Mode::Unrestricted;
    cfg.z = 35.0;
    cfg.q = 2;
    cfg.shells_u = {1};

    auto grid = std::make_shared<const RadialGrid>(build_grid(GridScheme::LogLinear, 60.0, 1500));
    auto [state, rep] = solve(cfg, hydrogenic_state(cfg, grid));

    std::printf("converged: %s after %d iterations (residual %.2e)\n", rep.converged ? "yes" : "no",
                rep.iterations, rep.final_residual);
    std::printf("E_HF = %.10f\n", rep.hf_energy);
    auto win = build_window(cfg);
    for (auto& lv : rep.occupied)
        std::printf("  level n=%d l=%d: eps = %.8f  (window [%.6f, %.6f], inside: %s)\n", lv.n, lv.ell,
                    lv.eps, win.intervals[0].lo, win.intervals[0].hi, lv.in_window ? "yes" : "no");
    return rep.converged ? 0 : 1;
}
