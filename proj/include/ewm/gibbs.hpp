#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/measures.hpp"
#include "ewm/operator.hpp"
#include "ewm/rng.hpp"
#include "ewm/soliton.hpp"
#include "ewm/stats.hpp"

namespace ewm {

/// Dirichlet sine modes sqrt(2/(R-1)) sin(pi m (r-1)/(R-1)), m = 1..N,
/// tabulated on the interior nodes; exactly orthonormal under the
/// h-weighted inner product.
struct SineBasis {
    RadialGrid grid;
    int N = 0;
    std::vector<double> table; // mode-major: table[m*(M-1) + i] = e_{m+1}(r_{i+1})

    double mode(int i, int m) const { return table[static_cast<std::size_t>(m) * (grid.M - 1) + i]; }
};

inline SineBasis make_sine_basis(const RadialGrid& g, int N) {
    if (N < 1 || N > g.M - 1) throw std::invalid_argument("make_sine_basis: need 1 <= N <= M-1");
    SineBasis b;
    b.grid = g;
    b.N = N;
    b.table.resize(static_cast<std::size_t>(N) * (g.M - 1));
    const double norm = std::sqrt(2.0 / (g.R - 1.0));
    for (int m = 0; m < N; ++m)
        for (int i = 0; i < g.M - 1; ++i)
            b.table[static_cast<std::size_t>(m) * (g.M - 1) + i] =
                norm * std::sin(M_PI * (m + 1) * static_cast<double>(i + 1) / g.M);
    return b;
}

/// L^2-orthogonal projection onto the first N sine modes.
inline Field project(const Field& f, const SineBasis& basis) {
    const RadialGrid& g = f.grid;
    if (!(g == basis.grid)) throw std::invalid_argument("project: grid mismatch");
    const int n = g.M - 1;
    Field out(g);
    for (int m = 0; m < basis.N; ++m) {
        const double* em = basis.table.data() + static_cast<std::size_t>(m) * n;
        double coef = 0.0;
        for (int i = 0; i < n; ++i) coef += f.v[i + 1] * em[i];
        coef *= g.h;
        for (int i = 0; i < n; ++i) out.v[i + 1] += coef * em[i];
    }
    return out;
}

inline Field project(const Field& f, int N) { return project(f, make_sine_basis(f.grid, N)); }

namespace detail {
// Taylor-stable density of the second-order remainder:
//   sin^2(Q+u) - sin^2(Q) - sin(2Q) u - cos(2Q) u^2
//     = sin(2Q) (sin(2u)/2 - u) + cos(2Q) (sin^2 u - u^2)
inline double remainder_density(double sin2q, double cos2q, double u) {
    double su = std::sin(u);
    return sin2q * (0.5 * std::sin(2.0 * u) - u) + cos2q * (su * su - u * u);
}
} // namespace detail

/// V_{n,k,L}(psi) = (k(k+1)/2) int_1^L [sin^2(Q + psi/r) - sin^2 Q
///                  - sin(2Q) psi/r - cos(2Q) (psi/r)^2], trapezoid on nodes.
inline double potential_V(const Field& psi, double L, const ProfileOnGrid& prof) {
    const RadialGrid& g = psi.grid;
    if (!(g == prof.grid)) throw std::invalid_argument("potential_V: grid mismatch");
    int iL = g.index_of(L);
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    double s = 0.0;
    for (int i = 0; i <= iL; ++i) {
        double u = psi.v[i] * prof.inv_r[i];
        double val = detail::remainder_density(prof.sin2Q[i], prof.cos2Q[i], u);
        s += (i == 0 || i == iL) ? 0.5 * val : val;
    }
    return 0.5 * kk * s * g.h;
}

/// Truncated potential V^{(N)}: the sine terms see P_N psi while the
/// quadratic subtraction keeps the unprojected psi, as in the measure
/// density; integrated over the full interval [1, R].
inline double potential_V_truncated(const Field& psi, const SineBasis& basis, const ProfileOnGrid& prof) {
    const RadialGrid& g = psi.grid;
    if (!(g == prof.grid)) throw std::invalid_argument("potential_V_truncated: grid mismatch");
    Field pn = project(psi, basis);
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    double s = 0.0;
    for (int i = 0; i <= g.M; ++i) {
        double a = pn.v[i] * prof.inv_r[i];
        double b = psi.v[i] * prof.inv_r[i];
        double val = detail::remainder_density(prof.sin2Q[i], prof.cos2Q[i], a)
                   + prof.cos2Q[i] * (a * a - b * b);
        s += (i == 0 || i == g.M) ? 0.5 * val : val;
    }
    return 0.5 * kk * s * g.h;
}

inline double potential_V_truncated(const Field& psi, int N, const ProfileOnGrid& prof) {
    return potential_V_truncated(psi, make_sine_basis(psi.grid, N), prof);
}

/// Importance-weighted ensemble targeting the Gibbs measure.
struct WeightedEnsemble {
    Ensemble base;
    std::vector<double> logweights;
    double zhat = 1.0;
    double zhat_stderr = 0.0;
    double ess = 0.0;
    bool ess_warning = false;
    std::string note;

    std::vector<double> weights() const {
        std::vector<double> w(logweights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(logweights[i]);
        return w;
    }
};

inline WeightedEnsemble gibbs_reweight(Ensemble ensemble, double L, const ProfileOnGrid& prof,
                                       double ess_floor = 100.0) {
    WeightedEnsemble we;
    we.base = std::move(ensemble);
    we.logweights.reserve(we.base.count());
    std::vector<double> w;
    for (const Field& f : we.base.samples) {
        double lw = -potential_V(f, L, prof);
        we.logweights.push_back(lw);
        w.push_back(std::exp(lw));
    }
    we.zhat = stats::mean(w);
    we.zhat_stderr = stats::jackknife_stderr(w);
    we.ess = stats::effective_sample_size(w);
    if (we.ess < ess_floor) {
        we.ess_warning = true;
        we.note = "effective sample size " + std::to_string(we.ess) +
                  " below floor; consider the pCN sampler";
    }
    return we;
}

struct PcnConfig {
    double beta = 0.3;
    int burnin = 1000;
    int thin = 10;
    std::uint64_t seed = 42;
};

struct PcnStats {
    double acceptance_rate = 0.0;
    bool rate_warning = false;
};

/// Preconditioned Crank-Nicolson chain: proposal sqrt(1-beta^2) psi + beta xi
/// with xi a fresh prior draw; accept with min(1, exp(V(psi) - V(psi'))).
/// The invariant law is the Gibbs reweighting of the Gaussian prior.
template <class PotentialFn>
inline WeightedEnsemble pcn_sample_with(const GaussianSampler& sampler, const PcnConfig& cfg,
                                        PotentialFn&& potential, int steps, PcnStats* stats_out = nullptr) {
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw std::invalid_argument("pcn_sample: beta must lie in (0,1)");
    const double keep = std::sqrt(1.0 - cfg.beta * cfg.beta);

    Field cur = draw_sample(sampler, cfg.seed, 0);
    double curV = potential(cur);
    long accepted = 0;

    WeightedEnsemble out;
    out.base.params = sampler.params;
    out.base.grid = sampler.basis.grid;
    out.base.seed = cfg.seed;

    for (int step = 1; step <= cfg.burnin + steps; ++step) {
        Field xi = draw_sample(sampler, cfg.seed, step);
        Field prop(cur.grid);
        for (int i = 0; i < cur.size(); ++i) prop.v[i] = keep * cur.v[i] + cfg.beta * xi.v[i];
        double propV = potential(prop);
        double u = rng::uniform(cfg.seed, step, 0xACCE77);
        if (std::log(u) < curV - propV) {
            cur = std::move(prop);
            curV = propV;
            ++accepted;
        }
        if (step > cfg.burnin && (step - cfg.burnin) % cfg.thin == 0) {
            out.base.samples.push_back(cur);
            out.logweights.push_back(0.0);
        }
    }
    out.zhat = 1.0;
    out.ess = static_cast<double>(out.base.count());

    PcnStats st;
    st.acceptance_rate = static_cast<double>(accepted) / (cfg.burnin + steps);
    st.rate_warning = st.acceptance_rate < 0.1 || st.acceptance_rate > 0.9;
    if (st.rate_warning)
        out.note = "pCN acceptance rate " + std::to_string(st.acceptance_rate) + "; retune beta";
    if (stats_out) *stats_out = st;
    return out;
}

inline WeightedEnsemble pcn_sample(const GaussianSampler& sampler, const PcnConfig& cfg, double L,
                                   const ProfileOnGrid& prof, int steps, PcnStats* stats_out = nullptr) {
    return pcn_sample_with(sampler, cfg, [&](const Field& f) { return potential_V(f, L, prof); }, steps,
                           stats_out);
}

inline double exp_moment_threshold(int k) { return 1.0 + 1.0 / (4.0 * k * (k + 1)); }

struct ExpMomentResult {
    double estimate = 0.0;
    double stderr_est = 0.0;
    bool above_threshold = false;
};

/// Monte Carlo estimate of E[exp(-q V_{n,k,L})] over a Gaussian ensemble.
inline ExpMomentResult exp_moment(const Ensemble& e, double q, double L, const ProfileOnGrid& prof) {
    if (q < 0.0) throw std::invalid_argument("exp_moment: q must be nonnegative");
    std::vector<double> vals;
    vals.reserve(e.count());
    for (const Field& f : e.samples) vals.push_back(std::exp(-q * potential_V(f, L, prof)));
    ExpMomentResult res;
    res.estimate = stats::mean(vals);
    res.stderr_est = stats::stderr_of_mean(vals);
    res.above_threshold = prof.k >= 1 && q >= exp_moment_threshold(prof.k);
    return res;
}

struct IncrementReport {
    std::vector<double> L_values, L_increments;
    std::vector<double> N_values, N_increments;
    double L_slope = 0.0;
    double N_slope = 0.0;
};

/// p-norms over the ensemble of V_L - V_{L/2} and |V - V^(N)| exp|V - V^(N)|,
/// with log-log slopes against L and N.
inline IncrementReport increment_diagnostic(const Ensemble& e, const ProfileOnGrid& prof,
                                            const std::vector<double>& Ls, const std::vector<int>& Ns,
                                            double p) {
    IncrementReport rep;
    for (double L : Ls) {
        if (L < 2.0) throw std::invalid_argument("increment_diagnostic: L must be >= 2");
        std::vector<double> diffs;
        for (const Field& f : e.samples)
            diffs.push_back(potential_V(f, L, prof) - potential_V(f, L / 2.0, prof));
        rep.L_values.push_back(L);
        rep.L_increments.push_back(stats::pnorm_of_sample(diffs, p));
    }
    for (int N : Ns) {
        std::vector<double> diffs;
        if (N >= e.grid.M - 1) {
            diffs.assign(e.count(), 0.0);
        } else {
            SineBasis basis = make_sine_basis(e.grid, N);
            for (const Field& f : e.samples) {
                double d = std::abs(potential_V(f, e.grid.R, prof) - potential_V_truncated(f, basis, prof));
                diffs.push_back(d * std::exp(d));
            }
        }
        rep.N_values.push_back(N);
        rep.N_increments.push_back(stats::pnorm_of_sample(diffs, p));
    }
    auto loglog_slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (y[i] > 0.0) { lx.push_back(std::log(x[i])); ly.push_back(std::log(y[i])); }
        return lx.size() >= 2 ? stats::fit_line(lx, ly).slope : 0.0;
    };
    if (rep.L_values.size() >= 2) rep.L_slope = loglog_slope(rep.L_values, rep.L_increments);
    if (rep.N_values.size() >= 2) {
        std::vector<double> nx(rep.N_values.begin(), rep.N_values.end());
        rep.N_slope = loglog_slope(nx, rep.N_increments);
    }
    return rep;
}

struct VariationalResult {
    double q = 0.0;
    std::vector<double> per_sample_minima;
    double average = 0.0;          // the variational lower bound
    std::vector<double> first_trace; // objective along the first minimization
    int max_iterations_used = 0;
};

namespace detail {

struct DriftObjective {
    const Field& psi;
    double q;
    int iL;
    const ProfileOnGrid& prof;
    const DiscreteOperator& op;

    // objective q V_{n,k,L}(psi + zeta) + 1/2 <zeta, A zeta>
    double value(const std::vector<double>& zeta) const {
        const RadialGrid& g = prof.grid;
        const double kk = static_cast<double>(prof.k) * (prof.k + 1);
        double quad = 0.0;
        for (int i = 0; i < g.M; ++i) { // interval [r_i, r_{i+1}], ghost zeros at the ends
            double zl = (i == 0) ? 0.0 : zeta[i - 1];
            double zr = (i == g.M - 1) ? 0.0 : zeta[i];
            double dz = (zr - zl) / g.h;
            quad += dz * dz * g.h;
        }
        for (int i = 1; i < g.M; ++i) quad += prof.potential[i] * zeta[i - 1] * zeta[i - 1] * g.h;

        double pot = 0.0;
        for (int i = 0; i <= iL; ++i) {
            double zi = (i == 0 || i == g.M) ? 0.0 : zeta[i - 1];
            double u = (psi.v[i] + zi) * prof.inv_r[i];
            double val = remainder_density(prof.sin2Q[i], prof.cos2Q[i], u);
            pot += (i == 0 || i == iL) ? 0.5 * val : val;
        }
        return q * 0.5 * kk * pot * g.h + 0.5 * quad;
    }

    // analytic gradient with respect to interior zeta values
    std::vector<double> gradient(const std::vector<double>& zeta) const {
        const RadialGrid& g = prof.grid;
        const double kk = static_cast<double>(prof.k) * (prof.k + 1);
        const int n = g.M - 1;
        std::vector<double> grad(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double zm = (i == 0) ? 0.0 : zeta[i - 1];
            double zp = (i == n - 1) ? 0.0 : zeta[i + 1];
            grad[i] = (2.0 * zeta[i] - zm - zp) / g.h + prof.potential[i + 1] * zeta[i] * g.h;
        }
        for (int i = 1; i <= iL && i < g.M; ++i) {
            double w = (i == iL) ? 0.5 : 1.0;
            double u = (psi.v[i] + zeta[i - 1]) * prof.inv_r[i];
            double dv = std::sin(2.0 * (prof.Q[i] + u)) - prof.sin2Q[i] - 2.0 * prof.cos2Q[i] * u;
            grad[i - 1] += q * 0.5 * kk * w * g.h * dv * prof.inv_r[i];
        }
        return grad;
    }
};

} // namespace detail

/// Per-sample minimization of q V(psi + zeta) + 1/2 <zeta, A zeta> over grid
/// drifts vanishing at both endpoints; descent in the A-metric (tridiagonal
/// preconditioner) with Armijo backtracking, gradient tolerance 1e-8.
inline VariationalResult variational_lower_bound(const Ensemble& e, double q, double L,
                                                 const ProfileOnGrid& prof, const DiscreteOperator& op,
                                                 double grad_tol = 1e-8, int max_iter = 200) {
    VariationalResult res;
    res.q = q;
    const RadialGrid& g = prof.grid;
    int iL = g.index_of(L);

    for (int s = 0; s < e.count(); ++s) {
        detail::DriftObjective obj{e.samples[s], q, iL, prof, op};
        std::vector<double> zeta(g.M - 1, 0.0);
        double f = obj.value(zeta);
        bool record = (s == 0);
        if (record) res.first_trace.push_back(f);

        int it = 0;
        for (; it < max_iter; ++it) {
            std::vector<double> grad = obj.gradient(zeta);
            double gnorm = 0.0;
            for (double v : grad) gnorm += v * v;
            gnorm = std::sqrt(gnorm / g.h); // discrete L^2 norm of the functional gradient
            if (gnorm <= grad_tol) break;

            std::vector<double> dir = tridiag_solve(op.matrix, grad);
            for (double& v : dir) v = -v / g.h;

            double gd = 0.0; // directional derivative
            for (int i = 0; i < g.M - 1; ++i) gd += grad[i] * dir[i];

            double step = 1.0;
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                std::vector<double> trial(zeta);
                for (int i = 0; i < g.M - 1; ++i) trial[i] += step * dir[i];
                double ft = obj.value(trial);
                if (ft <= f + 1e-4 * step * gd) {
                    zeta = std::move(trial);
                    f = ft;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (record) res.first_trace.push_back(f);
            if (!moved) throw std::runtime_error("variational_lower_bound: optimizer stagnated before tolerance");
        }
        res.max_iterations_used = std::max(res.max_iterations_used, it);
        res.per_sample_minima.push_back(f);
    }
    res.average = stats::mean(res.per_sample_minima);
    return res;
}

} // namespace ewm
