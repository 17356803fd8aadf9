#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ewm {

/// Symmetric tridiagonal matrix: diag (size n), off (size n-1).
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;

    int n() const { return static_cast<int>(diag.size()); }
};

/// Solve T x = b for a tridiagonal system (Thomas algorithm).
inline std::vector<double> tridiag_solve(const SymTridiag& T, const std::vector<double>& b) {
    int n = T.n();
    std::vector<double> c(n), d(n), x(n);
    c[0] = T.off.empty() ? 0.0 : T.off[0] / T.diag[0];
    d[0] = b[0] / T.diag[0];
    for (int i = 1; i < n; ++i) {
        double m = T.diag[i] - T.off[i - 1] * c[i - 1];
        c[i] = (i < n - 1) ? T.off[i] / m : 0.0;
        d[i] = (b[i] - T.off[i - 1] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

/// Number of eigenvalues of T strictly below x (Sturm sequence count).
inline int sturm_count(const SymTridiag& T, double x) {
    int n = T.n(), count = 0;
    double q = T.diag[0] - x;
    if (q < 0.0) ++count;
    for (int i = 1; i < n; ++i) {
        double e2 = T.off[i - 1] * T.off[i - 1];
        if (q == 0.0) q = 1e-300;
        q = T.diag[i] - x - e2 / q;
        if (q < 0.0) ++count;
    }
    return count;
}

/// Smallest eigenvalue by Sturm bisection.
inline double smallest_eigenvalue(const SymTridiag& T, double tol = 1e-13) {
    int n = T.n();
    double lo = T.diag[0], hi = T.diag[0];
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(T.off[i - 1]);
        if (i < n - 1) r += std::abs(T.off[i]);
        lo = std::min(lo, T.diag[i] - r);
        hi = std::max(hi, T.diag[i] + r);
    }
    double scale = std::max(std::abs(lo), std::abs(hi));
    for (int it = 0; it < 200 && hi - lo > tol * scale; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sturm_count(T, mid) >= 1) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace detail {
inline double hypot2(double a, double b) {
    double aa = std::abs(a), ab = std::abs(b);
    if (aa > ab) { double t = ab / aa; return aa * std::sqrt(1.0 + t * t); }
    if (ab == 0.0) return 0.0;
    double t = aa / ab;
    return ab * std::sqrt(1.0 + t * t);
}
} // namespace detail

/// Implicit-shift QL eigensolve of a symmetric tridiagonal matrix.
/// Eigenvalues returned ascending; eigenvectors accumulated column-major
/// (column m, entries 0..n-1 contiguous) and orthonormal in l^2.
/// Off-diagonal deflation threshold 1e-12 relative; 50 sweeps per eigenvalue.
struct TridiagEigen {
    std::vector<double> values;
    std::vector<double> vectors; // column-major, n x n

    int n() const { return static_cast<int>(values.size()); }
    double vec(int i, int m) const { return vectors[static_cast<std::size_t>(m) * n() + i]; }
};

inline TridiagEigen tridiag_eigensolve(const SymTridiag& T) {
    const int n = T.n();
    const double defl = 1e-12;
    std::vector<double> d = T.diag;
    std::vector<double> e(n, 0.0);
    for (int i = 0; i + 1 < n; ++i) e[i] = T.off[i];

    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= defl * dd) break;
            }
            if (m != l) {
                if (++iter > 50) throw std::runtime_error("tridiag_eigensolve: QL iteration budget exceeded");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = detail::hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = detail::hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    double* zi = z.data() + static_cast<std::size_t>(i) * n;
                    double* zi1 = z.data() + static_cast<std::size_t>(i + 1) * n;
                    for (int k = 0; k < n; ++k) {
                        double fk = zi1[k];
                        zi1[k] = s * zi[k] + c * fk;
                        zi[k] = c * zi[k] - s * fk;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    TridiagEigen out;
    out.values.resize(n);
    out.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int m = 0; m < n; ++m) {
        out.values[m] = d[order[m]];
        const double* src = z.data() + static_cast<std::size_t>(order[m]) * n;
        std::copy(src, src + n, out.vectors.data() + static_cast<std::size_t>(m) * n);
    }
    return out;
}

} // namespace ewm
