#pragma once

#include <cmath>
#include <stdexcept>

#include "ewm/base.hpp"

namespace ewm {

struct FoldResult {
    double r;   // folded point in [1, R]
    int sign;   // +1 or -1
};

/// Fold an arbitrary real into [1, R] through the double reflection that is
/// odd around r = 1 and r = R, so (Ext_R f)(x) = sign * f(r) for any f
/// vanishing at both endpoints. Period 2(R - 1).
inline FoldResult extend_fold(double x, double R) {
    if (!(R > 1.0)) throw std::invalid_argument("extend_fold: R must exceed 1");
    const double P = 2.0 * (R - 1.0);
    double t = std::fmod(x - 1.0, P);
    if (t < 0.0) t += P;
    if (t <= R - 1.0) return {1.0 + t, +1};
    return {1.0 + (P - t), -1};
}

/// Odd double-reflection extension of a field vanishing at 1 and R,
/// evaluated with linear interpolation off nodes.
inline double extension_odd(const Field& f, double x) {
    FoldResult fr = extend_fold(x, f.grid.R);
    return fr.sign * interp_linear(f, fr.r);
}

/// Even double-reflection extension (no sign flip); this is the
/// antiderivative of the odd extension of f' whenever f(1) = 0.
inline double extension_even(const Field& f, double x) {
    FoldResult fr = extend_fold(x, f.grid.R);
    return interp_linear(f, fr.r);
}

/// Plain restriction to [1, L]; L must sit on a grid node.
inline Field restrict_field(const Field& f, double L) {
    const RadialGrid& g = f.grid;
    int iL = g.index_of(L);
    if (iL < 2) throw std::invalid_argument("restrict_field: L must leave at least two intervals");
    RadialGrid sub(L, iL);
    Field out(sub);
    for (int i = 0; i <= iL; ++i) out.v[i] = f.v[i];
    return out;
}

/// Restriction with a linear ramp on [L-1, L]:
///   f(L-1) + (r - (L-1)) (f(L) - f(L-1))        (as printed)
///   f(L-1) + (r - (L-1)) (0    - f(L-1))        (ramp_to_zero variant)
/// The zeroed variant re-imposes the Dirichlet condition at r = L.
inline Field restrict_zero(const Field& f, double L, bool ramp_to_zero = false) {
    const RadialGrid& g = f.grid;
    if (L < 2.0) throw std::invalid_argument("restrict_zero: L must be at least 2");
    int iL = g.index_of(L);
    int iL1 = g.index_of(L - 1.0);
    RadialGrid sub(L, iL);
    Field out(sub);
    double fl1 = f.v[iL1];
    double slope = (ramp_to_zero ? 0.0 : f.v[iL]) - fl1;
    for (int i = 0; i <= iL; ++i) {
        double r = sub.node(i);
        out.v[i] = (i <= iL1) ? f.v[i] : fl1 + (r - (L - 1.0)) * slope;
    }
    return out;
}

} // namespace ewm
