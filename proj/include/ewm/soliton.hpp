#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/stats.hpp"

namespace ewm {

/// Static profile Q_{n,k} on a fine uniform grid [1, R_far], its derivative,
/// and the fitted far-field coefficient alpha (Q ~ n*pi - alpha / r^{k+1}).
struct SolitonProfile {
    int n = 0;
    int k = 0;
    double r_far = 200.0;
    double step = 0.0;
    std::vector<double> Q;
    std::vector<double> Qp;
    double alpha = 0.0;
    double shoot_slope = 0.0; // converged Q'(1)

    int nodes() const { return static_cast<int>(Q.size()); }
    double radius(int i) const { return 1.0 + step * i; }

    double value_at(double r) const { return interp_cubic(Q, r); }
    double derivative_at(double r) const { return interp_cubic(Qp, r); }

    // 4-point Lagrange interpolation on the uniform fine grid.
    double interp_cubic(const std::vector<double>& y, double r) const {
        double x = (r - 1.0) / step;
        int nn = nodes();
        if (x <= 0.0) return y.front();
        if (x >= nn - 1) return y.back();
        int i = static_cast<int>(x);
        i = std::clamp(i, 1, nn - 3);
        double t = x - i;
        double ym1 = y[i - 1], y0 = y[i], y1 = y[i + 1], y2 = y[i + 2];
        double a = (-t * (t - 1.0) * (t - 2.0)) / 6.0;
        double b = ((t + 1.0) * (t - 1.0) * (t - 2.0)) / 2.0;
        double c = (-(t + 1.0) * t * (t - 2.0)) / 2.0;
        double d = ((t + 1.0) * t * (t - 1.0)) / 6.0;
        return a * ym1 + b * y0 + c * y1 + d * y2;
    }
};

namespace detail {

struct ShotOutcome {
    int verdict;     // +1 overshoot, -1 undershoot, 0 reached the far boundary
    double final_q;  // Q at the stopping radius
};

// RK4 integration of Q'' = -(2/r) Q' + k(k+1) sin(2Q)/(2 r^2) from r = 1
// with Q(1) = 0, Q'(1) = slope. Early exit once the trajectory has clearly
// overshot past n*pi or turned back down.
inline ShotOutcome integrate_shot(int n, int k, double slope, double r_far, double h,
                                  std::vector<double>* q_out, std::vector<double>* qp_out) {
    const double kk = static_cast<double>(k) * (k + 1);
    const double target_band = n * M_PI;
    auto accel = [kk](double r, double q, double p) {
        return -2.0 / r * p + kk / (2.0 * r * r) * std::sin(2.0 * q);
    };

    int steps = static_cast<int>(std::lround((r_far - 1.0) / h));
    double q = 0.0, p = slope;
    if (q_out) { q_out->assign(steps + 1, 0.0); qp_out->assign(steps + 1, 0.0); (*qp_out)[0] = p; }

    for (int i = 0; i < steps; ++i) {
        double r = 1.0 + h * i;
        double k1q = p, k1p = accel(r, q, p);
        double k2q = p + 0.5 * h * k1p, k2p = accel(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
        double k3q = p + 0.5 * h * k2p, k3p = accel(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
        double k4q = p + h * k3p, k4p = accel(r + h, q + h * k3q, p + h * k3p);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (q_out) { (*q_out)[i + 1] = q; (*qp_out)[i + 1] = p; }
        if (q > target_band + 0.3) return {+1, q};
        if (p <= 0.0 && q < target_band - 1e-3) return {-1, q};
    }
    return {0, q};
}

inline double fit_alpha_tail(const std::vector<double>& Q, int n, int k, double h, double r_far) {
    // least squares of r^{k+1}(n pi - Q) against the model alpha - D r^{-2(k+1)}.
    // The window sits well inside [1, R_far]: far enough out that higher-order
    // tail terms are tiny, far enough in that the boundary layer of the Robin
    // closure (which grows like r^{k} toward R_far) cannot bias the fit.
    double lo = 0.15 * r_far, hi = 0.45 * r_far;
    double s_y = 0.0, s_x = 0.0, s_xx = 0.0, s_xy = 0.0;
    int cnt = 0;
    for (int i = 0; i < static_cast<int>(Q.size()); ++i) {
        double r = 1.0 + h * i;
        if (r < lo || r > hi) continue;
        double y = std::pow(r, k + 1) * (n * M_PI - Q[i]);
        double x = std::pow(r, -2.0 * (k + 1));
        s_y += y;
        s_x += x;
        s_xx += x * x;
        s_xy += x * y;
        ++cnt;
    }
    if (cnt < 4) throw std::runtime_error("fit_alpha_tail: empty tail window");
    double det = cnt * s_xx - s_x * s_x;
    return (s_y * s_xx - s_x * s_xy) / det;
}

} // namespace detail

/// Shooting solve of the profile equation with bisection on Q'(1) and a
/// Robin-type far boundary value n*pi - alpha/R_far^{k+1} tightened by two
/// fixed-point passes on alpha. tol bounds the sup-norm finite-difference
/// residual of the stationary equation on the stored grid.
inline SolitonProfile compute_soliton(int n, int k, double r_far = 200.0, double tol = 1e-4,
                                      double ode_step = 2e-3) {
    if (!((n >= 0 && k >= 1) || (n == 0 && k == 0)))
        throw std::invalid_argument("compute_soliton: inadmissible (n,k)");
    if (r_far < 50.0) throw std::invalid_argument("compute_soliton: R_far must be at least 50");

    SolitonProfile prof;
    prof.n = n;
    prof.k = k;
    prof.r_far = r_far;
    prof.step = (r_far - 1.0) / std::lround((r_far - 1.0) / ode_step);

    int steps = static_cast<int>(std::lround((r_far - 1.0) / prof.step));
    if (n == 0) {
        prof.Q.assign(steps + 1, 0.0);
        prof.Qp.assign(steps + 1, 0.0);
        prof.alpha = 0.0;
        return prof;
    }

    double target = n * M_PI;
    double slope = 0.0;
    for (int pass = 0; pass < 6; ++pass) {
        // bracket: scan Q'(1) in (0, 10]
        double s_lo = 0.0, s_hi = -1.0;
        for (double s = 0.25; s <= 10.0 + 1e-9; s += 0.25) {
            auto shot = detail::integrate_shot(n, k, s, r_far, prof.step, nullptr, nullptr);
            bool over = shot.verdict == +1 || (shot.verdict == 0 && shot.final_q > target);
            if (over) { s_hi = s; break; }
            s_lo = s;
        }
        if (s_hi < 0.0) throw std::runtime_error("compute_soliton: no overshoot bracket in Q'(1) <= 10");
        if (s_lo == 0.0) throw std::runtime_error("compute_soliton: bracket lower end at zero slope");

        for (int it = 0; it < 200 && (s_hi - s_lo) > 1e-15 * s_hi; ++it) {
            double s = 0.5 * (s_lo + s_hi);
            auto shot = detail::integrate_shot(n, k, s, r_far, prof.step, nullptr, nullptr);
            bool over = shot.verdict == +1 || (shot.verdict == 0 && shot.final_q > target);
            (over ? s_hi : s_lo) = s;
        }
        slope = 0.5 * (s_lo + s_hi);
        detail::integrate_shot(n, k, slope, r_far, prof.step, &prof.Q, &prof.Qp);
        prof.alpha = detail::fit_alpha_tail(prof.Q, n, k, prof.step, r_far);
        target = n * M_PI - prof.alpha / std::pow(r_far, k + 1);
    }
    prof.shoot_slope = slope;

    // residual check of the converged profile
    double res = 0.0;
    const double kk = static_cast<double>(k) * (k + 1);
    for (int i = 1; i < steps; ++i) {
        double r = prof.radius(i);
        double d2 = (prof.Q[i + 1] - 2.0 * prof.Q[i] + prof.Q[i - 1]) / (prof.step * prof.step);
        double d1 = (prof.Q[i + 1] - prof.Q[i - 1]) / (2.0 * prof.step);
        res = std::max(res, std::abs(-d2 - 2.0 / r * d1 + kk / (2.0 * r * r) * std::sin(2.0 * prof.Q[i])));
    }
    if (res > tol)
        throw std::runtime_error("compute_soliton: residual " + std::to_string(res) +
                                 " above tol (bracket slope " + std::to_string(slope) + ")");
    return prof;
}

struct AsymptoticFit {
    double alpha = 0.0;
    double decay_slope = 0.0;
};

/// Least-squares alpha on the far tail plus the log-log slope of the
/// remainder |Q - (n pi - alpha/r^{k+1})| over a mid-range window; the
/// remainder is expected to decay near r^{-3(k+1)}.
inline AsymptoticFit asymptotic_fit(const SolitonProfile& prof, double win_lo = 3.0, double win_hi = 14.0) {
    if (prof.n < 1) throw std::invalid_argument("asymptotic_fit: requires n >= 1");
    double alpha = detail::fit_alpha_tail(prof.Q, prof.n, prof.k, prof.step, prof.r_far);

    std::vector<double> lx, ly;
    for (int i = 0; i < prof.nodes(); ++i) {
        double r = prof.radius(i);
        if (r < win_lo || r > win_hi) continue;
        double rem = std::abs(prof.Q[i] - (prof.n * M_PI - alpha / std::pow(r, prof.k + 1)));
        if (rem < 1e-13 * (1.0 + std::abs(alpha))) continue; // below integration noise
        lx.push_back(std::log(r));
        ly.push_back(std::log(rem));
    }
    if (lx.size() < 8) throw std::runtime_error("asymptotic_fit: tail window too short");
    return {alpha, stats::fit_line(lx, ly).slope};
}

/// Trapezoid value of (1/2) int_1^upTo r^2 ((d_r Q)^2 + k(k+1) sin^2(Q)/r^2).
inline double energy_of(const SolitonProfile& prof, double up_to) {
    if (up_to > prof.r_far + 1e-9) throw std::invalid_argument("energy_of: upTo beyond the profile grid");
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    int last = std::min(prof.nodes() - 1, static_cast<int>(std::lround((up_to - 1.0) / prof.step)));
    double s = 0.0;
    for (int i = 0; i <= last; ++i) {
        double r = prof.radius(i);
        double sq = std::sin(prof.Q[i]);
        double val = 0.5 * (r * r * prof.Qp[i] * prof.Qp[i] + kk * sq * sq);
        s += (i == 0 || i == last) ? 0.5 * val : val;
    }
    return s * prof.step;
}

/// Same energy for an arbitrary nodal profile on the fine grid (used by the
/// minimality probes).
inline double energy_of_values(const SolitonProfile& prof, const std::vector<double>& Q, double up_to) {
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    int last = std::min(static_cast<int>(Q.size()) - 1, static_cast<int>(std::lround((up_to - 1.0) / prof.step)));
    double s = 0.0;
    for (int i = 0; i <= last; ++i) {
        double r = prof.radius(i);
        double qp = (i == 0) ? (Q[1] - Q[0]) / prof.step
                  : (i == last) ? (Q[last] - Q[last - 1]) / prof.step
                                : (Q[i + 1] - Q[i - 1]) / (2.0 * prof.step);
        double sq = std::sin(Q[i]);
        double val = 0.5 * (r * r * qp * qp + kk * sq * sq);
        s += (i == 0 || i == last) ? 0.5 * val : val;
    }
    return s * prof.step;
}

/// Profile data cached on a working grid: Q, sin(2Q), cos(2Q), 1/r and the
/// linearized potential k(k+1) cos(2Q)/r^2.
struct ProfileOnGrid {
    int n = 0;
    int k = 0;
    RadialGrid grid;
    std::vector<double> Q, sin2Q, cos2Q, inv_r, potential;
};

inline ProfileOnGrid profile_on_grid(const SolitonProfile& prof, const RadialGrid& g) {
    if (g.R > prof.r_far + 1e-9) throw std::invalid_argument("profile_on_grid: grid exceeds the profile range");
    ProfileOnGrid p;
    p.n = prof.n;
    p.k = prof.k;
    p.grid = g;
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    p.Q.resize(g.size());
    p.sin2Q.resize(g.size());
    p.cos2Q.resize(g.size());
    p.inv_r.resize(g.size());
    p.potential.resize(g.size());
    for (int i = 0; i <= g.M; ++i) {
        double r = g.node(i);
        double q = (prof.n == 0) ? 0.0 : prof.value_at(r);
        p.Q[i] = q;
        p.sin2Q[i] = std::sin(2.0 * q);
        p.cos2Q[i] = std::cos(2.0 * q);
        p.inv_r[i] = 1.0 / r;
        p.potential[i] = kk * p.cos2Q[i] / (r * r);
    }
    return p;
}

} // namespace ewm
