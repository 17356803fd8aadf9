#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/rng.hpp"
#include "ewm/soliton.hpp"

namespace oracle {

// General (nonsymmetric) tridiagonal solve for the Newton steps below.
inline std::vector<double> solve_tridiag(const std::vector<double>& lower, const std::vector<double>& diag,
                                         const std::vector<double>& upper, std::vector<double> rhs) {
    int n = static_cast<int>(diag.size());
    std::vector<double> c(n, 0.0), x(n);
    std::vector<double> d = diag;
    c[0] = upper[0] / d[0];
    rhs[0] /= d[0];
    for (int i = 1; i < n; ++i) {
        double m = d[i] - lower[i - 1] * c[i - 1];
        if (i < n - 1) c[i] = upper[i] / m;
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / m;
    }
    x[n - 1] = rhs[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = rhs[i] - c[i] * x[i + 1];
    return x;
}

struct RelaxedProfile {
    double h = 0.0;
    std::vector<double> Q; // nodes 1 .. r_far
    double alpha = 0.0;
};

// Damped-Newton relaxation of the profile boundary value problem on a finite
// difference grid; a solver route fully independent of RK4 shooting.
inline RelaxedProfile relax_soliton(int n, int k, double r_far, double h, int alpha_passes = 6) {
    int nodes = static_cast<int>(std::lround((r_far - 1.0) / h)) + 1;
    double kk = static_cast<double>(k) * (k + 1);
    std::vector<double> Q(nodes);
    for (int i = 0; i < nodes; ++i) {
        double r = 1.0 + h * i;
        Q[i] = n * M_PI * (1.0 - std::pow(r, -(k + 1)));
    }
    double alpha = 0.0;

    for (int pass = 0; pass < alpha_passes; ++pass) {
        double q_far = n * M_PI - alpha / std::pow(r_far, k + 1);
        Q[0] = 0.0;
        Q[nodes - 1] = q_far;

        for (int newton = 0; newton < 60; ++newton) {
            int m = nodes - 2;
            std::vector<double> lower(m - 1), diag(m), upper(m - 1), res(m);
            double worst = 0.0;
            for (int j = 0; j < m; ++j) {
                int i = j + 1;
                double r = 1.0 + h * i;
                double f = -(Q[i + 1] - 2.0 * Q[i] + Q[i - 1]) / (h * h)
                           - (Q[i + 1] - Q[i - 1]) / (r * h)
                           + kk / (2.0 * r * r) * std::sin(2.0 * Q[i]);
                res[j] = -f;
                worst = std::max(worst, std::abs(f));
                diag[j] = 2.0 / (h * h) + kk / (r * r) * std::cos(2.0 * Q[i]);
                if (j > 0) lower[j - 1] = -1.0 / (h * h) + 1.0 / (r * h);
                if (j < m - 1) upper[j] = -1.0 / (h * h) - 1.0 / (r * h);
            }
            if (worst < 1e-12) break;
            std::vector<double> delta = solve_tridiag(lower, diag, upper, res);
            double damp = 1.0;
            double biggest = 0.0;
            for (double d : delta) biggest = std::max(biggest, std::abs(d));
            if (biggest > 0.5) damp = 0.5 / biggest;
            for (int j = 0; j < m; ++j) Q[j + 1] += damp * delta[j];
        }

        double s_y = 0.0, s_x = 0.0, s_xx = 0.0, s_xy = 0.0;
        int cnt = 0;
        for (int i = 0; i < nodes; ++i) {
            double r = 1.0 + h * i;
            if (r < 0.15 * r_far || r > 0.45 * r_far) continue;
            double y = std::pow(r, k + 1) * (n * M_PI - Q[i]);
            double x = std::pow(r, -2.0 * (k + 1));
            s_y += y; s_x += x; s_xx += x * x; s_xy += x * y;
            ++cnt;
        }
        alpha = (s_y * s_xx - s_x * s_xy) / (cnt * s_xx - s_x * s_x);
    }
    return {h, Q, alpha};
}

// Richardson-extrapolated alpha from two relaxation grids (h and h/2).
inline double relaxed_alpha(int n, int k, double r_far, double h) {
    double a1 = relax_soliton(n, k, r_far, h).alpha;
    double a2 = relax_soliton(n, k, r_far, 0.5 * h).alpha;
    return (4.0 * a2 - a1) / 3.0;
}

// Conditioned-random-walk Brownian bridge on the grid (exact law oracle).
inline ewm::Field bridge_path(const ewm::RadialGrid& g, std::uint64_t seed, std::uint64_t stream) {
    std::vector<double> s(g.size(), 0.0);
    for (int i = 1; i <= g.M; ++i) s[i] = s[i - 1] + std::sqrt(g.h) * ewm::rng::normal(seed, stream, i);
    ewm::Field w(g);
    for (int i = 0; i <= g.M; ++i) w.v[i] = s[i] - (g.node(i) - 1.0) / (g.R - 1.0) * s[g.M];
    return w;
}

// Shared profile cache so expensive shooting solves run once per binary.
inline const ewm::SolitonProfile& cached_soliton(int n, int k, double r_far = 200.0) {
    static std::map<std::tuple<int, int, double>, ewm::SolitonProfile> cache;
    auto key = std::make_tuple(n, k, r_far);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, ewm::compute_soliton(n, k, r_far)).first;
    return it->second;
}

} // namespace oracle
