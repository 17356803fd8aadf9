#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/gibbs.hpp"
#include "ewm/linear_wave.hpp"
#include "ewm/reflect.hpp"
#include "ewm/soliton.hpp"

namespace ewm {

enum class Scheme { cfl1, leapfrog };

struct FlowConfig {
    Scheme scheme = Scheme::cfl1;
    double dt = 0.0; // 0 = pick the scheme default (h for cfl1, 0.9 h for leapfrog)
    double T = 1.0;
    std::optional<int> N{};
    std::vector<double> snapshot_times{}; // empty = final time only
};

struct Trajectory {
    std::vector<PhaseState> snapshots;
    std::vector<double> energy_trace; // discrete energy at each snapshot
};

/// r^{-1} N(r^{-1} psi) with N(v) = (k(k+1)/2)(sin(2(Q+v)) - sin(2Q)).
inline Field nonlinearity(const Field& psi, const ProfileOnGrid& prof) {
    if (!(psi.grid == prof.grid)) throw std::invalid_argument("nonlinearity: grid mismatch");
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    Field out(psi.grid);
    for (int i = 0; i <= psi.grid.M; ++i) {
        double u = psi.v[i] * prof.inv_r[i];
        out.v[i] = prof.inv_r[i] * 0.5 * kk * (std::sin(2.0 * (prof.Q[i] + u)) - prof.sin2Q[i]);
    }
    return out;
}

namespace detail {

using Forcing = std::function<void(const std::vector<double>& u, std::vector<double>& force)>;

// Forcing split: the linearized potential part k(k+1)cos(2Q)/r^2 u is applied
// with the time-averaged (u^{m+1}+u^{m-1})/2 placement -- at unit CFL the
// explicit placement puts the top of the spectrum just past the stability
// boundary and the highest mode grows slowly -- while the quadratic-and-higher
// remainder stays explicit.

inline Forcing full_remainder_forcing(const ProfileOnGrid& prof) {
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    return [&prof, kk](const std::vector<double>& u, std::vector<double>& force) {
        const int M = prof.grid.M;
        for (int i = 1; i < M; ++i) {
            double x = u[i] * prof.inv_r[i];
            force[i] = prof.inv_r[i] * 0.5 * kk * (std::sin(2.0 * (prof.Q[i] + x)) - prof.sin2Q[i]) -
                       prof.potential[i] * u[i];
        }
        force[0] = force[M] = 0.0;
    };
}

// Explicit remainder of the truncated forcing:
//   P_N [ r^{-1} N(r^{-1} P_N u) - pot * P_N u ],
// the linear part P_N pot P_N being carried by the implicit solve.
inline Forcing truncated_remainder_forcing(const ProfileOnGrid& prof, const SineBasis& basis) {
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    return [&prof, &basis, kk](const std::vector<double>& u, std::vector<double>& force) {
        const int n = prof.grid.M - 1;
        const double h = prof.grid.h;
        std::vector<double> coef(basis.N, 0.0);
        for (int m = 0; m < basis.N; ++m) {
            const double* em = basis.table.data() + static_cast<std::size_t>(m) * n;
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += u[i + 1] * em[i];
            coef[m] = c * h;
        }
        std::vector<double> pu(n, 0.0);
        for (int m = 0; m < basis.N; ++m) {
            const double* em = basis.table.data() + static_cast<std::size_t>(m) * n;
            for (int i = 0; i < n; ++i) pu[i] += coef[m] * em[i];
        }
        std::vector<double> gvec(n);
        for (int i = 0; i < n; ++i) {
            double x = pu[i] * prof.inv_r[i + 1];
            gvec[i] = prof.inv_r[i + 1] * 0.5 * kk * (std::sin(2.0 * (prof.Q[i + 1] + x)) - prof.sin2Q[i + 1]) -
                      prof.potential[i + 1] * pu[i];
        }
        for (int m = 0; m < basis.N; ++m) {
            const double* em = basis.table.data() + static_cast<std::size_t>(m) * n;
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += gvec[i] * em[i];
            coef[m] = c * h;
        }
        for (int i = 1; i < prof.grid.M; ++i) force[i] = 0.0;
        for (int m = 0; m < basis.N; ++m) {
            const double* em = basis.table.data() + static_cast<std::size_t>(m) * n;
            for (int i = 0; i < n; ++i) force[i + 1] += coef[m] * em[i];
        }
        force[0] = force[prof.grid.M] = 0.0;
    };
}

inline Forcing zero_forcing() {
    return [](const std::vector<double>&, std::vector<double>& force) {
        std::fill(force.begin(), force.end(), 0.0);
    };
}

// Time-averaged linear part of a scheme: y = (dt^2/2) Pot x and the solve
// with (I + (dt^2/2) Pot).
struct ImplicitPart {
    std::function<void(const std::vector<double>& x, std::vector<double>& y)> perturb;
    std::function<void(std::vector<double>& x)> solve_inplace;
};

inline ImplicitPart diagonal_implicit(const RadialGrid& g, const std::vector<double>& pot, double dt) {
    auto half = std::make_shared<std::vector<double>>(g.size(), 0.0);
    for (int i = 0; i <= g.M; ++i) (*half)[i] = 0.5 * dt * dt * pot[i];
    ImplicitPart part;
    part.perturb = [half](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = (*half)[i] * x[i];
    };
    part.solve_inplace = [half](std::vector<double>& x) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] /= 1.0 + (*half)[i];
    };
    return part;
}

// Dense Cholesky factorization/solve for the small sine-space system.
struct DenseChol {
    int n = 0;
    std::vector<double> L; // lower triangle, row-major

    void factor(std::vector<double> A) {
        L.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = A[static_cast<std::size_t>(i) * n + j];
                for (int p = 0; p < j; ++p)
                    s -= L[static_cast<std::size_t>(i) * n + p] * L[static_cast<std::size_t>(j) * n + p];
                if (i == j)
                    L[static_cast<std::size_t>(i) * n + i] = std::sqrt(s);
                else
                    L[static_cast<std::size_t>(i) * n + j] = s / L[static_cast<std::size_t>(j) * n + j];
            }
    }

    void solve(std::vector<double>& b) const {
        for (int i = 0; i < n; ++i) {
            double s = b[i];
            for (int p = 0; p < i; ++p) s -= L[static_cast<std::size_t>(i) * n + p] * b[p];
            b[i] = s / L[static_cast<std::size_t>(i) * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double s = b[i];
            for (int p = i + 1; p < n; ++p) s -= L[static_cast<std::size_t>(p) * n + i] * b[p];
            b[i] = s / L[static_cast<std::size_t>(i) * n + i];
        }
    }
};

// Implicit handling of P_N pot P_N: the N x N system matrix is constant, so
// one Cholesky factorization serves the whole trajectory.
inline ImplicitPart truncated_implicit(const ProfileOnGrid& prof, const SineBasis& basis, double dt) {
    const int n = prof.grid.M - 1;
    const int N = basis.N;
    const double h = prof.grid.h;
    const double c = 0.5 * dt * dt;

    auto state = std::make_shared<std::pair<std::vector<double>, DenseChol>>();
    std::vector<double>& B = state->first; // c * <e_a, pot e_b>_h
    B.assign(static_cast<std::size_t>(N) * N, 0.0);
    for (int a = 0; a < N; ++a)
        for (int b = a; b < N; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += basis.mode(i, a) * prof.potential[i + 1] * basis.mode(i, b);
            double val = c * s * h;
            B[static_cast<std::size_t>(a) * N + b] = val;
            B[static_cast<std::size_t>(b) * N + a] = val;
        }
    std::vector<double> A = B;
    for (int a = 0; a < N; ++a) A[static_cast<std::size_t>(a) * N + a] += 1.0;
    state->second.n = N;
    state->second.factor(std::move(A));

    const SineBasis* bp = &basis;
    auto project_coef = [bp, n, h](const std::vector<double>& x) {
        std::vector<double> coef(bp->N, 0.0);
        for (int m = 0; m < bp->N; ++m) {
            const double* em = bp->table.data() + static_cast<std::size_t>(m) * n;
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += x[i + 1] * em[i];
            coef[m] = s * h;
        }
        return coef;
    };
    auto add_modes = [bp, n](const std::vector<double>& coef, double scale, std::vector<double>& y) {
        for (int m = 0; m < bp->N; ++m) {
            const double* em = bp->table.data() + static_cast<std::size_t>(m) * n;
            double cm = scale * coef[m];
            if (cm == 0.0) continue;
            for (int i = 0; i < n; ++i) y[i + 1] += cm * em[i];
        }
    };

    ImplicitPart part;
    part.perturb = [state, project_coef, add_modes, N](const std::vector<double>& x, std::vector<double>& y) {
        std::fill(y.begin(), y.end(), 0.0);
        std::vector<double> coef = project_coef(x);
        std::vector<double> d(N, 0.0);
        const std::vector<double>& B = state->first;
        for (int a = 0; a < N; ++a) {
            double s = 0.0;
            for (int b = 0; b < N; ++b) s += B[static_cast<std::size_t>(a) * N + b] * coef[b];
            d[a] = s;
        }
        add_modes(d, 1.0, y);
    };
    part.solve_inplace = [state, project_coef, add_modes](std::vector<double>& x) {
        // split off the P_N component, solve the small system, reassemble
        std::vector<double> cx = project_coef(x);
        std::vector<double> cy = cx;
        state->second.solve(cy);
        for (std::size_t m = 0; m < cx.size(); ++m) cy[m] -= cx[m];
        add_modes(cy, 1.0, x);
    };
    return part;
}

inline double discrete_energy(const RadialGrid& g, const ProfileOnGrid& prof,
                              const std::vector<double>& u, const std::vector<double>& v) {
    double kin = 0.0, grad = 0.0, pot = 0.0;
    for (int i = 0; i <= g.M; ++i) {
        double w = (i == 0 || i == g.M) ? 0.5 : 1.0;
        kin += w * v[i] * v[i];
        pot += w * prof.potential[i] * u[i] * u[i];
    }
    for (int i = 0; i < g.M; ++i) {
        double dz = (u[i + 1] - u[i]) / g.h;
        grad += dz * dz;
    }
    Field uf(g, u);
    return 0.5 * (kin + pot) * g.h + 0.5 * grad * g.h + potential_V(uf, g.R, prof);
}

struct StepPlan {
    double dt;
    int steps;
    std::vector<int> snapshot_steps;
};

inline StepPlan plan_steps(const FlowConfig& cfg, const RadialGrid& g) {
    StepPlan plan;
    plan.dt = cfg.dt;
    if (plan.dt == 0.0) plan.dt = (cfg.scheme == Scheme::cfl1) ? g.h : 0.9 * g.h;
    if (cfg.scheme == Scheme::cfl1 && std::abs(plan.dt - g.h) > 1e-12 * g.h)
        throw std::invalid_argument("evolve: cfl1 requires dt = h");
    if (cfg.scheme == Scheme::leapfrog && plan.dt > g.h * (1.0 + 1e-12))
        throw std::invalid_argument("evolve: CFL violation, leapfrog requires dt <= h");
    plan.steps = static_cast<int>(std::lround(cfg.T / plan.dt));
    plan.steps = std::max(plan.steps, 0);
    std::vector<double> times = cfg.snapshot_times;
    if (times.empty()) times = {cfg.T};
    for (double t : times) plan.snapshot_steps.push_back(static_cast<int>(std::lround(t / plan.dt)));
    return plan;
}

inline Trajectory run_three_level(const PhaseState& state, const FlowConfig& cfg,
                                  const ProfileOnGrid& prof, const Forcing& forcing,
                                  const std::function<ImplicitPart(double dt)>& make_implicit) {
    state.check();
    if (!(state.psi.grid == prof.grid)) throw std::invalid_argument("evolve: state/profile grid mismatch");
    const RadialGrid& g = state.psi.grid;
    StepPlan plan = plan_steps(cfg, g);
    const double dt = plan.dt;
    const double cfl2 = (dt * dt) / (g.h * g.h);
    ImplicitPart implicit = make_implicit(dt);

    std::vector<double> prev = state.psi.v;
    std::vector<double> force(g.size(), 0.0);
    std::vector<double> pprev(g.size(), 0.0); // (dt^2/2) Pot applied to prev
    implicit.perturb(prev, pprev);

    // first step: exact free propagation of (psi, W) plus a half-step
    // correction carrying the full forcing
    forcing(prev, force);
    Field first = dalembert_linear(state.psi, state.W, dt);
    std::vector<double> cur = first.v;
    for (int i = 1; i < g.M; ++i) cur[i] -= 0.5 * dt * dt * force[i] + pprev[i];

    Trajectory traj;
    auto want = [&plan](int m) {
        for (int s : plan.snapshot_steps)
            if (s == m) return true;
        return false;
    };

    auto record = [&](int m, const std::vector<double>& um, const std::vector<double>& uprev,
                      const std::vector<double>& unext) {
        PhaseState snap;
        snap.time = m * dt;
        snap.psi = Field(g, um);
        std::vector<double> v(g.size());
        for (int i = 0; i <= g.M; ++i) v[i] = (unext[i] - uprev[i]) / (2.0 * dt);
        Field vf(g, v);
        snap.W = Field(g, antiderivative(vf));
        traj.snapshots.push_back(snap);
        traj.energy_trace.push_back(discrete_energy(g, prof, um, v));
    };

    if (want(0)) {
        // central velocity at t = 0 from a backward free step
        Field wneg = state.W;
        for (double& x : wneg.v) x = -x;
        Field back = dalembert_linear(state.psi, wneg, dt);
        std::vector<double> bv = back.v;
        for (int i = 1; i < g.M; ++i) bv[i] -= 0.5 * dt * dt * force[i] + pprev[i];
        record(0, prev, bv, cur);
    }

    std::vector<double> next(g.size(), 0.0);
    for (int m = 1; m <= plan.steps; ++m) {
        forcing(cur, force);
        implicit.perturb(prev, pprev);
        if (cfg.scheme == Scheme::cfl1) {
            for (int i = 1; i < g.M; ++i)
                next[i] = cur[i + 1] + cur[i - 1] - prev[i] - pprev[i] - dt * dt * force[i];
        } else {
            for (int i = 1; i < g.M; ++i)
                next[i] = 2.0 * cur[i] - prev[i] - pprev[i] +
                          cfl2 * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) - dt * dt * force[i];
        }
        implicit.solve_inplace(next);
        next[0] = next[g.M] = 0.0;
        if (m % 256 == 0 && !std::isfinite(next[g.M / 2]))
            throw std::runtime_error("evolve: non-finite field values");
        if (want(m)) record(m, cur, prev, next);
        std::swap(prev, cur);
        std::swap(cur, next);
    }
    if (!traj.snapshots.empty() && !std::isfinite(traj.snapshots.back().psi.v[g.M / 2]))
        throw std::runtime_error("evolve: non-finite field values");
    return traj;
}

} // namespace detail

/// Nonlinear flow of the full system. The linearized potential is applied
/// with the time-averaged placement; only the quadratic-and-higher remainder
/// of the nonlinearity is explicit.
inline Trajectory evolve(const PhaseState& state, const FlowConfig& cfg, const ProfileOnGrid& prof) {
    auto make_imp = [&prof](double dt) { return detail::diagonal_implicit(prof.grid, prof.potential, dt); };
    return detail::run_three_level(state, cfg, prof, detail::full_remainder_forcing(prof), make_imp);
}

/// Galerkin-truncated flow: forcing P_N(r^{-1} N(r^{-1} P_N u)) with its
/// linear part P_N pot P_N handled the same time-averaged way, so full
/// truncation reproduces the full flow.
inline Trajectory evolve_truncated(const PhaseState& state, const FlowConfig& cfg,
                                   const ProfileOnGrid& prof, const SineBasis& basis) {
    auto make_imp = [&prof, &basis](double dt) { return detail::truncated_implicit(prof, basis, dt); };
    return detail::run_three_level(state, cfg, prof, detail::truncated_remainder_forcing(prof, basis),
                                   make_imp);
}

inline Trajectory evolve_truncated(const PhaseState& state, const FlowConfig& cfg, const ProfileOnGrid& prof) {
    if (!cfg.N) throw std::invalid_argument("evolve_truncated: cfg.N is required");
    SineBasis basis = make_sine_basis(state.psi.grid, *cfg.N);
    auto make_imp = [&prof, &basis](double dt) { return detail::truncated_implicit(prof, basis, dt); };
    return detail::run_three_level(state, cfg, prof, detail::truncated_remainder_forcing(prof, basis),
                                   make_imp);
}

/// Linearized flow around Q: potential k(k+1) cos(2Q) r^{-2} u, time-averaged.
inline Trajectory evolve_linear(const PhaseState& state, const FlowConfig& cfg, const ProfileOnGrid& prof) {
    auto make_imp = [&prof](double dt) { return detail::diagonal_implicit(prof.grid, prof.potential, dt); };
    return detail::run_three_level(state, cfg, prof, detail::zero_forcing(), make_imp);
}

/// Energy of a snapshot: 1/2 int ((d_t psi)^2 + (d_r psi)^2 + k(k+1) cos(2Q)/r^2 psi^2)
/// + V_{n,k,R}(psi); the velocity is read off the stored antiderivative
/// (smooth trajectories only).
inline double energy(const PhaseState& state, const ProfileOnGrid& prof) {
    const RadialGrid& g = state.psi.grid;
    std::vector<double> v(g.size());
    for (int i = 0; i <= g.M; ++i) {
        if (i == 0) v[i] = (state.W.v[1] - state.W.v[0]) / g.h;
        else if (i == g.M) v[i] = (state.W.v[g.M] - state.W.v[g.M - 1]) / g.h;
        else v[i] = (state.W.v[i + 1] - state.W.v[i - 1]) / (2.0 * g.h);
    }
    return detail::discrete_energy(g, prof, state.psi.v, v);
}

/// Finite speed of propagation probe: evolve the state on [1, M_outer] and
/// its zero-clamped restriction on [1, L]; return the sup difference on
/// [1, K] at time t. Exactly zero (round-off) whenever K + |t| + 1 <= L.
inline double finite_speed_check(const PhaseState& state, const SolitonProfile& sol, double t,
                                 double K, double L, double M_outer) {
    const RadialGrid& g = state.psi.grid;
    if (!(K + std::abs(t) + 1.0 <= L + 1e-12 && L <= M_outer + 1e-12 && M_outer <= g.R + 1e-12))
        throw std::invalid_argument("finite_speed_check: window inequality violated");

    auto windowed = [&](double edge) {
        PhaseState s;
        s.psi = restrict_zero(state.psi, edge, /*ramp_to_zero=*/true);
        s.W = restrict_field(state.W, edge);
        return s;
    };

    PhaseState outer = (M_outer < g.R) ? windowed(M_outer) : state;
    PhaseState inner = windowed(L);

    FlowConfig cfg;
    cfg.scheme = Scheme::cfl1;
    cfg.T = std::abs(t);

    ProfileOnGrid prof_outer = profile_on_grid(sol, outer.psi.grid);
    ProfileOnGrid prof_inner = profile_on_grid(sol, inner.psi.grid);
    Trajectory to = evolve(outer, cfg, prof_outer);
    Trajectory ti = evolve(inner, cfg, prof_inner);

    const Field& a = to.snapshots.back().psi;
    const Field& b = ti.snapshots.back().psi;
    int iK = a.grid.index_of(K);
    double worst = 0.0;
    for (int i = 0; i <= iK; ++i) worst = std::max(worst, std::abs(a.v[i] - b.v[i]));
    return worst;
}

} // namespace ewm
