#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/reflect.hpp"

namespace ewm {

/// Free-wave d'Alembert evolution of (f, W) to time t:
///   u(t,r) = 1/2 [(Ext f)(r+t) + (Ext f)(r-t)] + 1/2 [Wbar(r+t) - Wbar(r-t)]
/// where Wbar is the even double-reflection extension of the velocity
/// antiderivative W (the odd extension of the velocity integrates to the
/// even extension of W).
inline Field dalembert_linear(const Field& f, const Field& W, double t) {
    if (!(f.grid == W.grid)) throw std::invalid_argument("dalembert_linear: mismatched grids");
    const RadialGrid& g = f.grid;
    Field u(g);
    for (int i = 0; i <= g.M; ++i) {
        double r = g.node(i);
        u.v[i] = 0.5 * (extension_odd(f, r + t) + extension_odd(f, r - t))
               + 0.5 * (extension_even(W, r + t) - extension_even(W, r - t));
    }
    u.v[0] = 0.0;
    u.v[g.M] = 0.0;
    return u;
}

/// Duhamel integral of a forcing history sampled at times s_j = j*dt:
///   1/2 int_0^t ds int_{r-(t-s)}^{r+(t-s)} (Ext h)(s, rho) drho,
/// trapezoid in s; the inner integral is evaluated exactly on the grid via
/// the even extension of the running antiderivative of each frame.
inline Field duhamel(const std::vector<Field>& frames, double dt, double t) {
    if (frames.empty()) throw std::invalid_argument("duhamel: no forcing frames");
    const RadialGrid& g = frames.front().grid;
    int steps = static_cast<int>(std::lround(t / dt));
    if (steps + 1 > static_cast<int>(frames.size()))
        throw std::invalid_argument("duhamel: forcing history shorter than t");

    Field out(g);
    if (steps == 0) return out;

    for (int j = 0; j <= steps; ++j) {
        double s = dt * j;
        double w = (j == 0 || j == steps) ? 0.5 : 1.0; // trapezoid in s
        Field H(g, antiderivative(frames[j]));
        double reach = t - s;
        for (int i = 1; i < g.M; ++i) {
            double r = g.node(i);
            out.v[i] += 0.5 * w * dt * (extension_even(H, r + reach) - extension_even(H, r - reach));
        }
    }
    return out;
}

} // namespace ewm
