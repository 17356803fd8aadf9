#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ewm/base.hpp"

namespace ewm {

/// Discrete weighted Hölder norm
///   sup_i |r_i^kappa f_i| + sup_{i != j} |max(r_i, r_j)^kappa (f_i - f_j) / |r_i - r_j|^alpha|
/// with alpha in [0, 1) and kappa <= 0. Exhaustive O(M^2) pair scan.
inline double holder_norm_c0(const Field& f, double alpha, double kappa) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_norm_c0: alpha must be in [0,1)");
    if (kappa > 0.0) throw std::invalid_argument("holder_norm_c0: kappa must be <= 0");

    const RadialGrid& g = f.grid;
    double sup0 = 0.0;
    for (int i = 0; i <= g.M; ++i) sup0 = std::max(sup0, std::pow(g.node(i), kappa) * std::abs(f.v[i]));

    double sup1 = 0.0;
    for (int j = 1; j <= g.M; ++j) {
        double rj = g.node(j);
        double wj = std::pow(rj, kappa); // r_j = max(r_i, r_j) for i < j
        for (int i = 0; i < j; ++i) {
            double q = wj * std::abs(f.v[j] - f.v[i]) / std::pow(g.h * (j - i), alpha);
            sup1 = std::max(sup1, q);
        }
    }
    return sup0 + sup1;
}

/// C^{-1} norm: the C^0 norm of the trapezoid antiderivative r -> int_1^r f.
/// Callers holding a W field (already an antiderivative) use holder_norm_c0 directly.
inline double holder_norm_cm1(const Field& f, double alpha, double kappa) {
    Field F(f.grid, antiderivative(f));
    return holder_norm_c0(F, alpha, kappa);
}

/// Same norm restricted to the subinterval [a, b] (node-aligned endpoints not required;
/// nodes strictly inside plus the boundary nodes snapped inward are scanned).
inline double holder_norm_c0_window(const Field& f, double alpha, double kappa, double a, double b) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_norm_c0_window: alpha must be in [0,1)");
    if (kappa > 0.0) throw std::invalid_argument("holder_norm_c0_window: kappa must be <= 0");
    const RadialGrid& g = f.grid;
    int i0 = static_cast<int>(std::ceil((a - 1.0) / g.h - 1e-12));
    int i1 = static_cast<int>(std::floor((b - 1.0) / g.h + 1e-12));
    i0 = std::max(i0, 0);
    i1 = std::min(i1, g.M);
    if (i1 <= i0) throw std::invalid_argument("holder_norm_c0_window: empty window");

    double sup0 = 0.0, sup1 = 0.0;
    for (int i = i0; i <= i1; ++i) sup0 = std::max(sup0, std::pow(g.node(i), kappa) * std::abs(f.v[i]));
    for (int j = i0 + 1; j <= i1; ++j) {
        double wj = std::pow(g.node(j), kappa);
        for (int i = i0; i < j; ++i)
            sup1 = std::max(sup1, wj * std::abs(f.v[j] - f.v[i]) / std::pow(g.h * (j - i), alpha));
    }
    return sup0 + sup1;
}

} // namespace ewm
