#pragma once

#include "atomscf/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

namespace atomscf {

enum class Mode { Unrestricted, Restricted, Hartree };

/// Shell structure and charge of one atomic problem, in the rescaled units
/// where the hydrogenic levels sit at -1/n^2.
struct Configuration {
    Mode mode = Mode::Unrestricted;
    double z = 0.0; // atomic number, positive real
    int q = 1;      // spin-state count; Hartree mode uses q = N

    std::vector<int> shells_u;                     // unrestricted: n_1 < ... < n_s
    std::vector<std::pair<int, int>> shells_r;     // restricted: (n_j, l_j), n ascending

    int n_electrons() const {
        if (mode == Mode::Restricted) {
            int n = 0;
            for (auto& [nn, ll] : shells_r) n += 2 * ll + 1;
            return n;
        }
        int s = 0;
        for (int nn : shells_u) s += nn * nn;
        return q * s;
    }

    int max_n() const {
        if (mode == Mode::Restricted) {
            int m = 0;
            for (auto& [nn, ll] : shells_r) m = std::max(m, nn);
            return m;
        }
        return shells_u.empty() ? 0 : shells_u.back();
    }

    int spin_factor() const { return mode == Mode::Restricted ? 1 : q; }
};

inline void validate(const Configuration& c) {
    if (!(c.z > 0.0)) throw invalid_config_error("z", "must be positive");
    if (c.q < 1) throw invalid_config_error("q", "must be a positive integer");
    if (c.mode == Mode::Restricted) {
        if (c.q != 1) throw invalid_config_error("q", "restricted mode requires q = 1");
        if (c.shells_r.empty()) throw invalid_config_error("shells", "must not be empty");
        std::set<std::pair<int, int>> seen;
        int prev_n = 0;
        for (auto& [nn, ll] : c.shells_r) {
            if (nn < 1) throw invalid_config_error("shells", "principal number must be >= 1");
            if (ll < 0 || ll > nn - 1) throw invalid_config_error("shells", "need 0 <= l <= n-1");
            if (!seen.insert({nn, ll}).second) throw invalid_config_error("shells", "duplicate shell index");
            if (nn < prev_n) throw invalid_config_error("shells", "principal numbers must be non-decreasing");
            prev_n = nn;
        }
    } else {
        if (c.shells_u.empty()) throw invalid_config_error("shells", "must not be empty");
        int prev = 0;
        for (int nn : c.shells_u) {
            if (nn < 1) throw invalid_config_error("shells", "principal number must be >= 1");
            if (nn == prev) throw invalid_config_error("shells", "duplicate shell index");
            if (nn < prev) throw invalid_config_error("shells", "must be strictly increasing");
            prev = nn;
        }
        if (c.mode == Mode::Hartree) {
            if (c.shells_u != std::vector<int>{1})
                throw invalid_config_error("shells", "hartree mode uses shells = [1]");
        }
    }
}

/// N and the shell gap Delta_s = n_s^-2 - (n_s+1)^-2.
inline std::pair<int, double> derive_counts(const Configuration& c) {
    validate(c);
    int ns = c.max_n();
    double ds = 1.0 / (ns * ns) - 1.0 / double((ns + 1) * (ns + 1));
    return {c.n_electrons(), ds};
}

/// Closed-form uniqueness thresholds and the contraction constant.
struct GapReport {
    double delta_s = 0.0;           // shell gap
    double delta = 0.0;             // window gap delta_s - 4N/Z (when positive)
    bool delta_valid = false;
    double z_threshold_thm1 = 0.0;  // (20N + 8 sqrt(2N)) / delta_s
    double z_threshold_thm2 = 0.0;  // (12N + 4 sqrt(2N) - 4) / delta_s
    double z_threshold_thm3 = 0.0;  // (40N + 16 sqrt(2N) - 8) / 3
    double contraction_bound = 0.0; // (8 / (delta Z)) (1 + sqrt(2N)) sqrt(2N)
    bool above_thm1 = false;
};

inline GapReport z_thresholds(const Configuration& c) {
    auto [n, ds] = derive_counts(c);
    GapReport r;
    r.delta_s = ds;
    double s2n = std::sqrt(2.0 * n);
    r.z_threshold_thm1 = (20.0 * n + 8.0 * s2n) / ds;
    r.z_threshold_thm2 = (12.0 * n + 4.0 * s2n - 4.0) / ds;
    r.z_threshold_thm3 = (40.0 * n + 16.0 * s2n - 8.0) / 3.0;
    r.delta = ds - 4.0 * n / c.z;
    r.delta_valid = r.delta > 0.0;
    if (!r.delta_valid) r.delta = 0.0;
    r.contraction_bound = r.delta_valid ? (8.0 / (r.delta * c.z)) * (1.0 + s2n) * s2n
                                        : std::numeric_limits<double>::infinity();
    r.above_thm1 = c.z > r.z_threshold_thm1;
    return r;
}

/// Union of occupied-spectrum windows [-1/n^2, -1/n^2 + 4N/Z].
struct SpectralWindow {
    struct Interval {
        double lo = 0.0, hi = 0.0;
        int n = 0; // principal number this interval tracks
    };
    std::vector<Interval> intervals; // sorted ascending, pairwise disjoint, hi < 0
    int expected_count = 0;

    bool contains(double x, double tol = 1e-9) const {
        for (auto& iv : intervals)
            if (x >= iv.lo - tol && x <= iv.hi + tol) return true;
        return false;
    }
};

inline SpectralWindow build_window(const Configuration& c) {
    auto [n_el, ds] = derive_counts(c);
    double width = 4.0 * n_el / c.z;
    std::set<int> ns;
    if (c.mode == Mode::Restricted)
        for (auto& [nn, ll] : c.shells_r) ns.insert(nn);
    else
        for (int nn : c.shells_u) ns.insert(nn);

    SpectralWindow w;
    w.expected_count = n_el;
    for (int nn : ns) {
        double lo = -1.0 / (nn * nn);
        w.intervals.push_back({lo, lo + width, nn});
    }
    std::sort(w.intervals.begin(), w.intervals.end(),
              [](auto& a, auto& b) { return a.lo < b.lo; });
    for (std::size_t k = 0; k + 1 < w.intervals.size(); ++k) {
        if (w.intervals[k].hi >= w.intervals[k + 1].lo)
            throw gap_violation_error(
                "spectral windows overlap: [-1/" + std::to_string(w.intervals[k].n) + "^2 .. ] width 4N/Z = " +
                std::to_string(width) + " reaches the next level; Z too small for this shell structure");
    }
    if (w.intervals.back().hi >= 0.0)
        throw gap_violation_error("top spectral window reaches the continuum edge; Z too small");
    return w;
}

/// Figure-1 style table: smallest integer Z with guaranteed Hartree-minimizer
/// uniqueness, for N = 2..9, against the published row.
struct ThresholdTableEntry {
    int n = 0;
    double threshold = 0.0;
    int z_ceiling = 0;
    int reference = 0;
    bool match = false;
};

inline std::vector<ThresholdTableEntry> threshold_table() {
    static constexpr std::array<int, 8> ref = {35, 51, 66, 81, 96, 111, 126, 140};
    std::vector<ThresholdTableEntry> out;
    for (int n = 2; n <= 9; ++n) {
        ThresholdTableEntry e;
        e.n = n;
        e.threshold = (40.0 * n + 16.0 * std::sqrt(2.0 * n) - 8.0) / 3.0;
        e.z_ceiling = static_cast<int>(std::ceil(e.threshold));
        if (std::abs(e.threshold - std::round(e.threshold)) < 1e-12)
            e.z_ceiling = static_cast<int>(std::round(e.threshold)) + 1; // Z > bound is strict
        e.reference = ref[static_cast<std::size_t>(n - 2)];
        e.match = (e.z_ceiling == e.reference);
        out.push_back(e);
    }
    return out;
}

} // namespace atomscf
