#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ewm {

/// Uniform grid on [1, R] with M intervals, nodes r_i = 1 + i*h.
struct RadialGrid {
    double R = 2.0;
    int M = 2;
    double h = 0.5;

    RadialGrid() = default;
    RadialGrid(double R_, int M_) : R(R_), M(M_), h((R_ - 1.0) / M_) {
        if (!(R > 1.0)) throw std::invalid_argument("RadialGrid: R must exceed 1");
        if (M < 2) throw std::invalid_argument("RadialGrid: M must be at least 2");
    }

    double node(int i) const { return 1.0 + h * static_cast<double>(i); }
    int size() const { return M + 1; }

    // Nearest node index of a radius expected to sit on the grid.
    int index_of(double r, double tol = 1e-9) const {
        double x = (r - 1.0) / h;
        int i = static_cast<int>(std::lround(x));
        if (i < 0 || i > M || std::abs(x - i) > tol * (1.0 + std::abs(x)))
            throw std::invalid_argument("RadialGrid: radius " + std::to_string(r) + " is not a grid node");
        return i;
    }

    bool operator==(const RadialGrid& o) const { return M == o.M && R == o.R; }
};

/// Model parameters: topological degree n, equivariance index k, outer
/// radius R, grid resolution M, optional spectral truncation N.
struct ModelParams {
    int n = 1;
    int k = 1;
    double R = 40.0;
    int M = 1024;
    std::optional<int> N{};

    void validate() const {
        bool admissible = (n >= 0 && k >= 1) || (n == 0 && k == 0);
        if (!admissible) throw std::invalid_argument("ModelParams: need n >= 0 and k >= 1, or (n,k) = (0,0)");
        if (!(R > 1.0)) throw std::invalid_argument("ModelParams: R must exceed 1");
        if (M < 2) throw std::invalid_argument("ModelParams: M must be at least 2");
        if (N && *N < 1) throw std::invalid_argument("ModelParams: N must be at least 1");
    }

    RadialGrid grid() const { return RadialGrid(R, M); }
};

/// Scalar nodal field on a radial grid.
struct Field {
    RadialGrid grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const RadialGrid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}
    Field(const RadialGrid& g, std::vector<double> values) : grid(g), v(std::move(values)) {
        if (static_cast<int>(v.size()) != g.size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
    int size() const { return grid.size(); }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

template <class F>
Field make_field(const RadialGrid& g, F&& f) {
    Field out(g);
    for (int i = 0; i <= g.M; ++i) out.v[i] = f(g.node(i));
    return out;
}

/// Position field psi (zero at both endpoints) and the spatial
/// antiderivative W of the velocity, with W(1) = 0. Velocities are kept
/// as antiderivatives so that white-noise data stays representable.
struct PhaseState {
    Field psi;
    Field W;
    double time = 0.0;

    void check() const {
        if (!(psi.grid == W.grid)) throw std::invalid_argument("PhaseState: psi and W live on different grids");
        if (std::abs(psi.v.front()) > 1e-12 || std::abs(psi.v.back()) > 1e-12)
            throw std::invalid_argument("PhaseState: psi must vanish at both endpoints");
        if (std::abs(W.v.front()) > 1e-12)
            throw std::invalid_argument("PhaseState: W must vanish at r = 1");
    }
};

/// Trapezoid value of int_1^{r_i} f for every i (running antiderivative).
inline std::vector<double> antiderivative(const Field& f) {
    std::vector<double> F(f.size(), 0.0);
    const double h = f.grid.h;
    for (int i = 1; i <= f.grid.M; ++i) F[i] = F[i - 1] + 0.5 * h * (f.v[i - 1] + f.v[i]);
    return F;
}

/// Trapezoid quadrature of the whole field over [1, R].
inline double trapezoid(const Field& f) {
    double s = 0.5 * (f.v.front() + f.v.back());
    for (int i = 1; i < f.grid.M; ++i) s += f.v[i];
    return s * f.grid.h;
}

/// Linear interpolation at an arbitrary point of [1, R].
inline double interp_linear(const Field& f, double r) {
    const RadialGrid& g = f.grid;
    double x = (r - 1.0) / g.h;
    if (x <= 0.0) return f.v.front();
    if (x >= g.M) return f.v.back();
    int i = static_cast<int>(x);
    double t = x - i;
    return (1.0 - t) * f.v[i] + t * f.v[i + 1];
}

} // namespace ewm
