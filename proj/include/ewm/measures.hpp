#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ewm/base.hpp"
#include "ewm/holder.hpp"
#include "ewm/operator.hpp"
#include "ewm/rng.hpp"
#include "ewm/stats.hpp"

namespace ewm {

/// Karhunen-Loeve sampler for the Gaussian measure with covariance A^{-1}:
/// psi = sum_m (g_m / lambda_m) e_m over the discrete spectral basis.
struct GaussianSampler {
    SpectralBasis basis;
    ModelParams params;
    int mode_cutoff = 0; // 0 means all modes

    // rows of e_m / lambda_m, laid out per interior node for fast sampling
    std::vector<double> kl_rows;

    int modes() const { return mode_cutoff > 0 ? mode_cutoff : basis.count(); }
};

inline GaussianSampler make_sampler(const ModelParams& params, SpectralBasis basis, int mode_cutoff = 0) {
    for (double l2 : basis.lambda2)
        if (!(l2 > 0.0)) throw std::invalid_argument("make_sampler: basis has a nonpositive eigenvalue");
    GaussianSampler s;
    s.params = params;
    s.basis = std::move(basis);
    s.mode_cutoff = mode_cutoff;
    const int n = s.basis.count();
    const int nm = s.modes();
    s.kl_rows.assign(static_cast<std::size_t>(n) * nm, 0.0);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < nm; ++m)
            s.kl_rows[static_cast<std::size_t>(i) * nm + m] = s.basis.mode(i, m) / std::sqrt(s.basis.lambda2[m]);
    return s;
}

/// Samples plus seed provenance; every sample vanishes at both endpoints.
struct Ensemble {
    ModelParams params;
    RadialGrid grid;
    std::uint64_t seed = 0;
    std::vector<Field> samples;

    int count() const { return static_cast<int>(samples.size()); }
};

/// Assemble the sample with prescribed mode coefficients g (KL weights).
inline Field sample_from_coefficients(const GaussianSampler& s, const std::vector<double>& g) {
    const int n = s.basis.count();
    const int nm = s.modes();
    Field f(s.basis.grid);
    for (int i = 0; i < n; ++i) {
        const double* row = s.kl_rows.data() + static_cast<std::size_t>(i) * nm;
        double acc = 0.0;
        for (int m = 0; m < nm; ++m) acc += row[m] * g[m];
        f.v[i + 1] = acc;
    }
    return f;
}

inline Field draw_sample(const GaussianSampler& s, std::uint64_t seed, std::uint64_t index) {
    const int nm = s.modes();
    std::vector<double> g(nm);
    for (int m = 0; m < nm; ++m) g[m] = rng::normal(seed, index, m);
    return sample_from_coefficients(s, g);
}

inline Ensemble sample_gaussian(const GaussianSampler& s, std::uint64_t seed, int count) {
    Ensemble e;
    e.params = s.params;
    e.grid = s.basis.grid;
    e.seed = seed;
    e.samples.reserve(count);
    for (int i = 0; i < count; ++i) e.samples.push_back(draw_sample(s, seed, i));
    return e;
}

/// White-noise velocity ensemble, stored through antiderivatives: W is a
/// sample of the (n,k) = (0,0) measure, a Brownian bridge on [1, R]; the
/// velocity itself is the distributional derivative and never materialized.
inline Ensemble sample_white_noise(double R, int M, std::uint64_t seed, int count) {
    ModelParams p;
    p.n = 0; p.k = 0; p.R = R; p.M = M;
    SolitonProfile zero = compute_soliton(0, 0, std::max(2.0 * R, 200.0));
    DiscreteOperator op = assemble(p, zero);
    GaussianSampler s = make_sampler(p, eigendecompose(op));
    return sample_gaussian(s, seed, count);
}

/// Unconditioned momentum white noise: W is a random-walk antiderivative
/// with W(1) = 0 and free right endpoint. This is the velocity marginal the
/// wave flow actually preserves; the bridge variant above pins the total
/// impulse int v = 0 and loses the constant-velocity mode.
inline Ensemble sample_momentum_white_noise(double R, int M, std::uint64_t seed, int count) {
    Ensemble e;
    e.params.n = 0;
    e.params.k = 0;
    e.params.R = R;
    e.params.M = M;
    e.grid = RadialGrid(R, M);
    e.seed = seed;
    double sqh = std::sqrt(e.grid.h);
    for (int s = 0; s < count; ++s) {
        Field w(e.grid);
        for (int i = 1; i <= M; ++i) w.v[i] = w.v[i - 1] + sqh * rng::normal(seed, s, i);
        e.samples.push_back(std::move(w));
    }
    return e;
}

struct MercerReport {
    double max_abs_z = 0.0;      // worst standardized covariance deviation
    double worst_entry_empirical = 0.0;
    double worst_entry_expected = 0.0;
    double min_diag_ratio = 0.0; // min over r of Chat(r,r) / ((1-r/R)(r-1))
};

/// Compare the empirical covariance of an ensemble against a Green's matrix;
/// standard errors from the Gaussian fourth-moment identity
/// Var(psi_r psi_rho) = G(r,r) G(rho,rho) + G(r,rho)^2.
inline MercerReport mercer_check(const Ensemble& e, const GreensMatrix& G, int min_samples = 10000) {
    if (e.count() < min_samples) throw std::invalid_argument("mercer_check: too few samples");
    if (!(e.grid == G.grid)) throw std::invalid_argument("mercer_check: grid mismatch");
    const int M = e.grid.M;
    const int n = M - 1;
    const double S = static_cast<double>(e.count());

    std::vector<double> cov(static_cast<std::size_t>(n) * n, 0.0);
    for (const Field& f : e.samples) {
        const double* x = f.v.data() + 1;
        for (int i = 0; i < n; ++i) {
            double xi = x[i];
            double* row = cov.data() + static_cast<std::size_t>(i) * n;
            for (int j = i; j < n; ++j) row[j] += xi * x[j];
        }
    }

    MercerReport rep;
    rep.min_diag_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double chat = cov[static_cast<std::size_t>(i) * n + j] / S;
            double gij = G.at(i + 1, j + 1);
            double var = G.at(i + 1, i + 1) * G.at(j + 1, j + 1) + gij * gij;
            double z = (chat - gij) / std::sqrt(var / S);
            if (std::abs(z) > rep.max_abs_z) {
                rep.max_abs_z = std::abs(z);
                rep.worst_entry_empirical = chat;
                rep.worst_entry_expected = gij;
            }
            if (i == j) {
                double r = e.grid.node(i + 1);
                double envelope = (1.0 - r / e.grid.R) * (r - 1.0);
                if (envelope > 0.0) rep.min_diag_ratio = std::min(rep.min_diag_ratio, chat / envelope);
            }
        }
    return rep;
}

struct GrowthHolderReport {
    double eps = 0.0;
    std::vector<double> growth_stats;  // per sample: sup_r |psi(r)| / r^{1/2+eps}
    std::vector<double> holder_stats;  // per sample: weighted (1-eps)/2 quotient
    double growth_median = 0.0;
    double holder_median = 0.0;
    double growth_q90 = 0.0;
    double holder_q90 = 0.0;
};

/// Per-sample growth and weighted-Hölder statistics of an ensemble:
/// sup |psi| / r^{1/2+eps} and sup |psi(r)-psi(rho)| / (max(r,rho)^eps |r-rho|^{(1-eps)/2}).
inline GrowthHolderReport growth_and_holder_diagnostic(const Ensemble& e, double eps) {
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("growth_and_holder_diagnostic: eps out of (0, 1/2)");
    GrowthHolderReport rep;
    rep.eps = eps;
    const double growth_exp = 0.5 + eps;
    const double holder_exp = 0.5 * (1.0 - eps);

    for (const Field& f : e.samples) {
        const RadialGrid& g = f.grid;
        double grow = 0.0, hold = 0.0;
        for (int i = 1; i <= g.M; ++i)
            grow = std::max(grow, std::abs(f.v[i]) / std::pow(g.node(i), growth_exp));
        for (int j = 1; j <= g.M; ++j) {
            double wj = std::pow(g.node(j), -eps);
            for (int i = 0; i < j; ++i)
                hold = std::max(hold, wj * std::abs(f.v[j] - f.v[i]) / std::pow(g.h * (j - i), holder_exp));
        }
        rep.growth_stats.push_back(grow);
        rep.holder_stats.push_back(hold);
    }
    rep.growth_median = stats::median(rep.growth_stats);
    rep.holder_median = stats::median(rep.holder_stats);
    rep.growth_q90 = stats::quantile(rep.growth_stats, 0.9);
    rep.holder_q90 = stats::quantile(rep.holder_stats, 0.9);
    return rep;
}

} // namespace ewm
