#pragma once

#include <cmath>
#include <vector>

namespace atomscf {

/// Squared Wigner 3j symbol (l1 l2 l3; 0 0 0).  Nonzero only for even
/// J = l1+l2+l3 within the triangle; closed form via the Racah expression.
inline double wigner3j000_sq(int l1, int l2, int l3) {
    int j = l1 + l2 + l3;
    if (j % 2 != 0) return 0.0;
    if (l3 < std::abs(l1 - l2) || l3 > l1 + l2) return 0.0;
    int g = j / 2;
    auto lf = [](int k) { return std::lgamma(double(k) + 1.0); };
    double log_sq = lf(j - 2 * l1) + lf(j - 2 * l2) + lf(j - 2 * l3) - lf(j + 1) +
                    2.0 * (lf(g) - lf(g - l1) - lf(g - l2) - lf(g - l3));
    return std::exp(log_sq);
}

/// Multipole orders contributing to the (l, l') exchange reduction:
/// |l-l'| <= k <= l+l' with l+l'+k even.
inline std::vector<int> exchange_multipoles(int l, int lp) {
    std::vector<int> ks;
    for (int k = std::abs(l - lp); k <= l + lp; k += 2) ks.push_back(k);
    return ks;
}

/// Angular weight of the multipole-k exchange term between channel l and a
/// filled (2l'+1) subshell: Lambda_k(l,l') = (2l'+1) * [3j(l k l'; 0 0 0)]^2.
/// Gated against the multipole-free oracle before any solver result counts.
inline double exchange_lambda(int l, int lp, int k) {
    return (2.0 * lp + 1.0) * wigner3j000_sq(l, k, lp);
}

} // namespace atomscf
