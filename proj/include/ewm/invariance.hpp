#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/dynamics.hpp"
#include "ewm/gibbs.hpp"
#include "ewm/holder.hpp"
#include "ewm/measures.hpp"
#include "ewm/stats.hpp"

namespace ewm {

/// Deterministic observables of a phase-space point: pointwise psi values,
/// smoothed velocity pairings (from W by parts), the potential V, and the
/// first spectral coefficients.
struct ObservableSet {
    const ProfileOnGrid* prof = nullptr;
    const SpectralBasis* basis = nullptr;
    std::vector<int> point_nodes;
    std::vector<std::vector<double>> testfun_deriv; // phi' on nodes, phi supported inside (1,R)
    int coefficient_count = 8;
    std::vector<std::string> names;

    int count() const { return static_cast<int>(names.size()); }

    std::vector<double> evaluate(const PhaseState& state) const {
        const RadialGrid& g = state.psi.grid;
        std::vector<double> out;
        out.reserve(count());
        for (int idx : point_nodes) out.push_back(state.psi.v[idx]);
        for (const auto& dphi : testfun_deriv) {
            // <d_t psi, phi> = -int W phi' (phi vanishes near both endpoints)
            double s = 0.0;
            for (int i = 1; i < g.M; ++i) s += state.W.v[i] * dphi[i];
            out.push_back(-s * g.h);
        }
        out.push_back(potential_V(state.psi, g.R, *prof));
        for (int m = 0; m < coefficient_count; ++m) {
            double c = 0.0;
            for (int i = 1; i < g.M; ++i) c += state.psi.v[i] * basis->mode(i - 1, m);
            out.push_back(c * g.h);
        }
        return out;
    }
};

inline ObservableSet make_observables(const ProfileOnGrid& prof, const SpectralBasis& basis,
                                      int coefficient_count = 8) {
    ObservableSet obs;
    obs.prof = &prof;
    obs.basis = &basis;
    obs.coefficient_count = coefficient_count;
    const RadialGrid& g = prof.grid;

    for (double frac : {0.25, 0.5, 0.75}) {
        int idx = static_cast<int>(std::lround(frac * g.M));
        obs.point_nodes.push_back(idx);
        obs.names.push_back("psi(r=" + std::to_string(g.node(idx)) + ")");
    }
    auto add_testfun = [&](double a, double b, const std::string& label) {
        std::vector<double> dphi(g.size(), 0.0);
        for (int i = 0; i <= g.M; ++i) {
            double r = g.node(i);
            if (r <= a || r >= b) continue;
            dphi[i] = M_PI / (b - a) * std::sin(2.0 * M_PI * (r - a) / (b - a));
        }
        obs.testfun_deriv.push_back(std::move(dphi));
        obs.names.push_back("velocity_pairing_" + label);
    };
    double third = (g.R - 1.0) / 3.0;
    add_testfun(1.0, 1.0 + third, "inner");
    add_testfun(1.0 + third, 1.0 + 2.0 * third, "middle");

    obs.names.push_back("potential_V");
    for (int m = 0; m < coefficient_count; ++m) obs.names.push_back("coef_e" + std::to_string(m + 1));
    return obs;
}

struct ObservableStat {
    std::string name;
    double ks_distance = 0.0;
    double ks_p = 1.0;
    double moment_z = 0.0;
    bool ks_pass = true;
};

struct InvarianceReport {
    std::vector<ObservableStat> stats;
    double bonferroni_level = 0.0;
    double ess = 0.0;
    bool all_pass = true;
    int sample_count = 0;
    double T = 0.0;
};

namespace detail {

inline InvarianceReport compare_ensembles(const std::vector<std::vector<double>>& obs0,
                                          const std::vector<std::vector<double>>& obsT,
                                          const std::vector<double>& weights,
                                          const ObservableSet& obs, double level) {
    InvarianceReport rep;
    rep.bonferroni_level = level / obs.count();
    rep.ess = stats::effective_sample_size(weights);
    rep.sample_count = static_cast<int>(obs0.size());

    for (int j = 0; j < obs.count(); ++j) {
        std::vector<double> a(obs0.size()), b(obsT.size());
        for (std::size_t s = 0; s < obs0.size(); ++s) a[s] = obs0[s][j];
        for (std::size_t s = 0; s < obsT.size(); ++s) b[s] = obsT[s][j];

        ObservableStat st;
        st.name = obs.names[j];
        auto ks = stats::ks_two_sample_weighted(a, weights, b, weights);
        st.ks_distance = ks.distance;
        st.ks_p = ks.p_value;
        auto ma = stats::weighted_mean(a, weights);
        auto mb = stats::weighted_mean(b, weights);
        double se = std::sqrt(ma.stderr_mean * ma.stderr_mean + mb.stderr_mean * mb.stderr_mean);
        st.moment_z = se > 0.0 ? (ma.mean - mb.mean) / se : 0.0;
        st.ks_pass = st.ks_p >= rep.bonferroni_level;
        rep.all_pass = rep.all_pass && st.ks_pass;
        rep.stats.push_back(std::move(st));
    }
    return rep;
}

} // namespace detail

struct InvarianceConfig {
    int sample_count = 10000;
    double T = 10.0;
    std::uint64_t seed = 42;
    double level = 0.01;
    double ess_floor = 100.0;
};

/// Distributional invariance of the truncated Gibbs measure under the
/// truncated flow: Gibbs^{(N)} samples by reweighting (V^{(N)} weights,
/// white-noise velocities), evolved to time T; every observable is compared
/// between t = 0 and t = T with a Bonferroni-corrected KS test.
inline InvarianceReport invariance_test_truncated(const ModelParams& params, const SolitonProfile& sol,
                                                  int N, const InvarianceConfig& cfg) {
    if (N > params.M / 8) throw std::invalid_argument("invariance_test_truncated: need N <= M/8");
    RadialGrid g = params.grid();
    ProfileOnGrid prof = profile_on_grid(sol, g);
    DiscreteOperator op = assemble(params, sol);
    SpectralBasis basis = eigendecompose(op);
    GaussianSampler sampler = make_sampler(params, basis);
    SineBasis sines = make_sine_basis(g, N);

    Ensemble positions = sample_gaussian(sampler, cfg.seed, cfg.sample_count);
    Ensemble velocities = sample_momentum_white_noise(params.R, params.M, cfg.seed ^ 0x57A7E5EEDULL, cfg.sample_count);

    std::vector<double> weights(cfg.sample_count);
    for (int s = 0; s < cfg.sample_count; ++s)
        weights[s] = std::exp(-potential_V_truncated(positions.samples[s], sines, prof));
    if (stats::effective_sample_size(weights) < cfg.ess_floor)
        throw std::runtime_error("invariance_test_truncated: effective sample size below floor");

    ObservableSet obs = make_observables(prof, basis);
    FlowConfig flow;
    flow.scheme = Scheme::cfl1;
    flow.T = cfg.T;
    flow.N = N;

    std::vector<std::vector<double>> obs0, obsT;
    obs0.reserve(cfg.sample_count);
    obsT.reserve(cfg.sample_count);
    for (int s = 0; s < cfg.sample_count; ++s) {
        PhaseState st;
        st.psi = positions.samples[s];
        st.W = velocities.samples[s];
        obs0.push_back(obs.evaluate(st));
        if (cfg.T == 0.0) {
            obsT.push_back(obs0.back());
        } else {
            Trajectory traj = evolve_truncated(st, flow, prof, sines);
            obsT.push_back(obs.evaluate(traj.snapshots.back()));
        }
    }
    InvarianceReport rep = detail::compare_ensembles(obs0, obsT, weights, obs, cfg.level);
    rep.T = cfg.T;
    return rep;
}

/// Same comparison for the full flow; deviations carry the O(h^2) time-space
/// discretization budget on top of sampling noise.
inline InvarianceReport invariance_test_full(const ModelParams& params, const SolitonProfile& sol,
                                             const InvarianceConfig& cfg) {
    RadialGrid g = params.grid();
    ProfileOnGrid prof = profile_on_grid(sol, g);
    DiscreteOperator op = assemble(params, sol);
    SpectralBasis basis = eigendecompose(op);
    GaussianSampler sampler = make_sampler(params, basis);

    Ensemble positions = sample_gaussian(sampler, cfg.seed, cfg.sample_count);
    Ensemble velocities = sample_momentum_white_noise(params.R, params.M, cfg.seed ^ 0x57A7E5EEDULL, cfg.sample_count);

    std::vector<double> weights(cfg.sample_count);
    for (int s = 0; s < cfg.sample_count; ++s)
        weights[s] = std::exp(-potential_V(positions.samples[s], params.R, prof));
    if (stats::effective_sample_size(weights) < cfg.ess_floor)
        throw std::runtime_error("invariance_test_full: effective sample size below floor");

    ObservableSet obs = make_observables(prof, basis);
    FlowConfig flow;
    flow.scheme = Scheme::cfl1;
    flow.T = cfg.T;

    std::vector<std::vector<double>> obs0, obsT;
    for (int s = 0; s < cfg.sample_count; ++s) {
        PhaseState st;
        st.psi = positions.samples[s];
        st.W = velocities.samples[s];
        obs0.push_back(obs.evaluate(st));
        if (cfg.T == 0.0) {
            obsT.push_back(obs0.back());
        } else {
            Trajectory traj = evolve(st, flow, prof);
            obsT.push_back(obs.evaluate(traj.snapshots.back()));
        }
    }
    InvarianceReport rep = detail::compare_ensembles(obs0, obsT, weights, obs, cfg.level);
    rep.T = cfg.T;
    return rep;
}

struct ProbeReport {
    std::vector<double> times;            // including t = 0
    std::vector<double> gibbs_median;     // weighted median windowed norm per time
    std::vector<double> smooth_norm;      // deterministic comparison run
    double band_ratio_max = 0.0;          // max over t>0 of median(t)/median(0) and inverse
    bool smooth_monotone_decay = true;
    bool gibbs_within_band = true;
};

/// Windowed norm ||(psi, W)|| on [1, 2]: weighted Hölder norm of the position
/// plus the same norm of the velocity antiderivative.
inline double windowed_norm(const PhaseState& state, double alpha = 0.45, double kappa = -0.55) {
    double a = holder_norm_c0_window(state.psi, alpha, kappa, 1.0, 2.0);
    Field wshift = state.W;
    double w1 = wshift.v[0];
    for (double& x : wshift.v) x -= w1;
    double b = holder_norm_c0_window(wshift, alpha, kappa, 1.0, 2.0);
    return a + b;
}

/// Soliton-resolution-failure probe: the Gibbs ensemble's windowed norm on
/// [1,2] is tracked at the horizon times (distributionally constant when the
/// measure is invariant), while the same statistic for smooth finite-energy
/// data decays once the initial light cone has left the window.
inline ProbeReport resolution_probe(const ModelParams& params, const SolitonProfile& sol,
                                    const std::vector<double>& horizon_times, int sample_count,
                                    std::uint64_t seed) {
    double t_max = 0.0;
    for (double t : horizon_times) t_max = std::max(t_max, t);
    if (t_max > 2.0 * params.R - 6.0)
        throw std::invalid_argument("resolution_probe: horizon exceeds the reflection-free window for R");

    RadialGrid g = params.grid();
    ProfileOnGrid prof = profile_on_grid(sol, g);
    DiscreteOperator op = assemble(params, sol);
    GaussianSampler sampler = make_sampler(params, eigendecompose(op));

    Ensemble positions = sample_gaussian(sampler, seed, sample_count);
    Ensemble velocities = sample_momentum_white_noise(params.R, params.M, seed ^ 0x57A7E5EEDULL, sample_count);
    std::vector<double> weights(sample_count);
    for (int s = 0; s < sample_count; ++s)
        weights[s] = std::exp(-potential_V(positions.samples[s], params.R, prof));

    FlowConfig flow;
    flow.scheme = Scheme::cfl1;
    flow.T = t_max;
    flow.snapshot_times = horizon_times;

    ProbeReport rep;
    rep.times.push_back(0.0);
    for (double t : horizon_times) rep.times.push_back(t);

    std::vector<std::vector<double>> norms(rep.times.size(), std::vector<double>(sample_count));
    for (int s = 0; s < sample_count; ++s) {
        PhaseState st;
        st.psi = positions.samples[s];
        st.W = velocities.samples[s];
        norms[0][s] = windowed_norm(st);
        Trajectory traj = evolve(st, flow, prof);
        for (std::size_t j = 0; j < traj.snapshots.size(); ++j)
            norms[j + 1][s] = windowed_norm(traj.snapshots[j]);
    }
    for (std::size_t j = 0; j < rep.times.size(); ++j)
        rep.gibbs_median.push_back(stats::weighted_median(norms[j], weights));

    // smooth compactly supported comparison data
    PhaseState smooth;
    smooth.psi = make_field(g, [](double r) {
        double a = 1.25, b = 3.75;
        if (r <= a || r >= b) return 0.0;
        double x = 2.0 * (r - a) / (b - a) - 1.0;
        return 0.4 * std::exp(-1.0 / (1.0 - x * x));
    });
    smooth.W = Field(g);
    rep.smooth_norm.push_back(windowed_norm(smooth));
    Trajectory straj = evolve(smooth, flow, prof);
    for (const PhaseState& snap : straj.snapshots) rep.smooth_norm.push_back(windowed_norm(snap));

    for (std::size_t j = 2; j < rep.smooth_norm.size(); ++j)
        rep.smooth_monotone_decay = rep.smooth_monotone_decay && rep.smooth_norm[j] < rep.smooth_norm[j - 1];

    double base = rep.gibbs_median[0];
    for (std::size_t j = 1; j < rep.gibbs_median.size(); ++j) {
        double ratio = rep.gibbs_median[j] / base;
        rep.band_ratio_max = std::max({rep.band_ratio_max, ratio, 1.0 / ratio});
        rep.gibbs_within_band = rep.gibbs_within_band && ratio <= 2.0 && ratio >= 0.5;
    }
    return rep;
}

} // namespace ewm
