#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ewm {
namespace stats {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean: empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double stderr_of_mean(const std::vector<double>& x) {
    return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

inline double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile: empty sample");
    std::sort(x.begin(), x.end());
    double pos = q * (static_cast<double>(x.size()) - 1.0);
    int i = static_cast<int>(pos);
    if (i + 1 >= static_cast<int>(x.size())) return x.back();
    double t = pos - i;
    return (1.0 - t) * x[i] + t * x[i + 1];
}

inline double median(const std::vector<double>& x) { return quantile(x, 0.5); }

inline double pnorm_of_sample(const std::vector<double>& x, double p) {
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v), p);
    return std::pow(s / static_cast<double>(x.size()), 1.0 / p);
}

/// Least-squares slope/intercept of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need matching samples, >= 2");
    double mx = mean(x), my = mean(y), sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Jackknife standard error of the mean of x.
inline double jackknife_stderr(const std::vector<double>& x) {
    std::size_t nsz = x.size();
    if (nsz < 2) throw std::invalid_argument("jackknife_stderr: need >= 2 samples");
    double total = std::accumulate(x.begin(), x.end(), 0.0);
    double full = total / static_cast<double>(nsz);
    double s = 0.0;
    for (double v : x) {
        double loo = (total - v) / static_cast<double>(nsz - 1);
        s += (loo - full) * (loo - full);
    }
    return std::sqrt(s * static_cast<double>(nsz - 1) / static_cast<double>(nsz));
}

inline double effective_sample_size(const std::vector<double>& w) {
    double s = 0.0, s2 = 0.0;
    for (double v : w) { s += v; s2 += v * v; }
    if (s2 == 0.0) return 0.0;
    return s * s / s2;
}

/// Asymptotic Kolmogorov-Smirnov tail probability Q(lambda).
inline double ks_tail(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

struct KsResult {
    double distance = 0.0;
    double p_value = 1.0;
    double n_effective = 0.0;
};

/// Two-sample KS test for weighted ensembles: D is the sup difference of the
/// weighted empirical CDFs, the null scale uses effective sample sizes.
inline KsResult ks_two_sample_weighted(const std::vector<double>& xa, const std::vector<double>& wa,
                                       const std::vector<double>& xb, const std::vector<double>& wb) {
    if (xa.size() != wa.size() || xb.size() != wb.size() || xa.empty() || xb.empty())
        throw std::invalid_argument("ks_two_sample_weighted: bad inputs");

    std::vector<int> ia(xa.size()), ib(xb.size());
    std::iota(ia.begin(), ia.end(), 0);
    std::iota(ib.begin(), ib.end(), 0);
    std::sort(ia.begin(), ia.end(), [&](int p, int q) { return xa[p] < xa[q]; });
    std::sort(ib.begin(), ib.end(), [&](int p, int q) { return xb[p] < xb[q]; });

    double ta = std::accumulate(wa.begin(), wa.end(), 0.0);
    double tb = std::accumulate(wb.begin(), wb.end(), 0.0);
    if (ta <= 0.0 || tb <= 0.0) throw std::invalid_argument("ks_two_sample_weighted: nonpositive total weight");

    double d = 0.0, ca = 0.0, cb = 0.0;
    std::size_t p = 0, q = 0;
    while (p < ia.size() || q < ib.size()) {
        double va = (p < ia.size()) ? xa[ia[p]] : std::numeric_limits<double>::infinity();
        double vb = (q < ib.size()) ? xb[ib[q]] : std::numeric_limits<double>::infinity();
        double v = std::min(va, vb);
        while (p < ia.size() && xa[ia[p]] <= v) ca += wa[ia[p++]];
        while (q < ib.size() && xb[ib[q]] <= v) cb += wb[ib[q++]];
        d = std::max(d, std::abs(ca / ta - cb / tb));
    }

    double na = effective_sample_size(wa);
    double nb = effective_sample_size(wb);
    double ne = na * nb / (na + nb);
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    return {d, ks_tail(lambda), ne};
}

inline KsResult ks_two_sample(const std::vector<double>& xa, const std::vector<double>& xb) {
    std::vector<double> wa(xa.size(), 1.0), wb(xb.size(), 1.0);
    return ks_two_sample_weighted(xa, wa, xb, wb);
}

inline double weighted_median(const std::vector<double>& x, const std::vector<double>& w) {
    if (x.size() != w.size() || x.empty()) throw std::invalid_argument("weighted_median: bad inputs");
    std::vector<int> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    double c = 0.0;
    for (int i : idx) {
        c += w[i];
        if (c >= 0.5 * total) return x[i];
    }
    return x[idx.back()];
}

/// Weighted mean and its standard error (normalized importance weights).
struct WeightedMoment {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

inline WeightedMoment weighted_mean(const std::vector<double>& x, const std::vector<double>& w) {
    double tw = std::accumulate(w.begin(), w.end(), 0.0);
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m += w[i] * x[i];
    m /= tw;
    double s2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s2 += w[i] * (x[i] - m) * (x[i] - m);
    s2 /= tw;
    double ne = effective_sample_size(w);
    return {m, std::sqrt(s2 / std::max(ne, 1.0))};
}

} // namespace stats
} // namespace ewm
