#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ewm/operator.hpp"
#include "oracles.hpp"

using namespace ewm;

namespace {

ModelParams make_params(int n, int k, double R, int M) {
    ModelParams p;
    p.n = n; p.k = k; p.R = R; p.M = M;
    return p;
}

double greens_numeric_error(int k, double R, int M) {
    ModelParams p = make_params(0, k, R, M);
    DiscreteOperator op = assemble(p, oracle::cached_soliton(0, k));
    GreensMatrix G = greens_numeric(op);
    double worst = 0.0, scale = 0.0;
    for (int i = 1; i < M; i += 3)
        for (int j = 1; j < M; j += 5) {
            double want = greens_explicit(k, R, G.grid.node(i), G.grid.node(j));
            worst = std::max(worst, std::abs(G.at(i, j) - want));
            scale = std::max(scale, std::abs(want));
        }
    return worst / scale;
}

} // namespace

TEST_CASE("assemble produces the expected potentials", "[operator]") {
    ModelParams p00 = make_params(0, 0, 3.0, 32);
    DiscreteOperator op00 = assemble(p00, oracle::cached_soliton(0, 0));
    for (double q : op00.potential) REQUIRE(q == 0.0);

    ModelParams p01 = make_params(0, 1, 3.0, 32);
    DiscreteOperator op01 = assemble(p01, oracle::cached_soliton(0, 1));
    for (int i = 0; i < op01.dim(); ++i) {
        double r = op01.grid.node(i + 1);
        REQUIRE(op01.potential[i] == Catch::Approx(2.0 / (r * r)));
    }

    ModelParams p11 = make_params(1, 1, 40.0, 256);
    DiscreteOperator op11 = assemble(p11, oracle::cached_soliton(1, 1));
    double pot_min = 1e300;
    double r_at_min = 0.0;
    for (int i = 0; i < op11.dim(); ++i)
        if (op11.potential[i] < pot_min) { pot_min = op11.potential[i]; r_at_min = op11.grid.node(i + 1); }
    REQUIRE(pot_min < 0.0);   // cos(2Q) < 0 once Q crosses pi/4
    REQUIRE(r_at_min < 5.0);

    ModelParams bad = make_params(1, 1, 400.0, 64); // beyond the profile range
    REQUIRE_THROWS_AS(assemble(bad, oracle::cached_soliton(1, 1)), std::invalid_argument);
}

TEST_CASE("eigendecompose: classical spectrum, orthonormality, reconstruction", "[operator]") {
    int M = 128;
    ModelParams p = make_params(0, 0, 3.0, M);
    DiscreteOperator op = assemble(p, oracle::cached_soliton(0, 0));
    SpectralBasis basis = eigendecompose(op);

    for (int m = 1; m <= 8; ++m) {
        double target = M_PI * m / (p.R - 1.0);
        REQUIRE(std::sqrt(basis.lambda2[m - 1]) == Catch::Approx(target).epsilon(2e-3));
    }
    // low eigenvectors close to normalized sines
    for (int m = 1; m <= 3; ++m) {
        double norm = std::sqrt(2.0 / (p.R - 1.0));
        double sgn = basis.mode(0, m - 1) > 0 ? 1.0 : -1.0;
        for (int i = 1; i < M; i += 7) {
            double want = norm * std::sin(M_PI * m * (basis.grid.node(i) - 1.0) / (p.R - 1.0));
            REQUIRE(sgn * basis.mode(i - 1, m - 1) == Catch::Approx(want).margin(2e-3));
        }
    }
    // h-weighted orthonormality
    for (int a = 0; a < M - 1; a += 13)
        for (int b = a; b < M - 1; b += 17) {
            double dot = 0.0;
            for (int i = 0; i < M - 1; ++i) dot += basis.mode(i, a) * basis.mode(i, b);
            dot *= basis.grid.h;
            REQUIRE(dot == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-10));
        }

    // spectral reconstruction of the matrix: A_ij = sum_m lambda_m^2 e_m(i) e_m(j) h
    ModelParams p11 = make_params(1, 1, 20.0, 64);
    DiscreteOperator op11 = assemble(p11, oracle::cached_soliton(1, 1));
    SpectralBasis b11 = eigendecompose(op11);
    int n = op11.dim();
    double worst = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double want = (i == j) ? op11.matrix.diag[i]
                                   : (std::abs(i - j) == 1 ? op11.matrix.off[std::min(i, j)] : 0.0);
            double got = 0.0;
            for (int m = 0; m < n; ++m) got += b11.lambda2[m] * b11.mode(i, m) * b11.mode(j, m);
            got *= b11.grid.h;
            worst = std::max(worst, std::abs(got - want));
            scale = std::max(scale, std::abs(want));
        }
    REQUIRE(worst / scale < 1e-8);

    // positivity for the soliton-linearized operator at this radius
    REQUIRE(b11.lambda2.front() > 0.0);
}

TEST_CASE("explicit Green's function: bridge case and gamma arithmetic", "[operator]") {
    REQUIRE(greens_explicit(0, 3.0, 2.0, 2.0) == Catch::Approx(0.5));
    for (int i = 0; i < 50; ++i) {
        double r = 1.0 + 2.0 * rng::uniform(77, i, 0);
        double rho = 1.0 + 2.0 * rng::uniform(77, i, 1);
        double lo = std::min(r, rho), hi = std::max(r, rho);
        REQUIRE(greens_explicit(0, 3.0, r, rho) ==
                Catch::Approx((3.0 - hi) * (lo - 1.0) / 2.0).margin(1e-13));
    }
    REQUIRE(std::sqrt(0.25 + 2.0) - 0.5 == Catch::Approx(1.0));  // gamma_1
    REQUIRE(std::sqrt(0.25 + 6.0) - 0.5 == Catch::Approx(2.0));  // gamma_2
}

TEST_CASE("numeric Green's matrix matches the closed form for n = 0", "[operator]") {
    // k = 0: the tridiagonal inverse reproduces the bridge kernel exactly
    REQUIRE(greens_numeric_error(0, 20.0, 512) < 1e-11);
    for (int k : {1, 2}) {
        double coarse = greens_numeric_error(k, 20.0, 256);
        double fine = greens_numeric_error(k, 20.0, 512);
        REQUIRE(fine < 2e-3);
        REQUIRE(std::log2(coarse / fine) > 1.8);
    }
}

TEST_CASE("Green's matrix structure: boundary rows, symmetry, diagonal bound", "[operator]") {
    ModelParams p = make_params(1, 1, 40.0, 320);
    DiscreteOperator op = assemble(p, oracle::cached_soliton(1, 1));
    GreensMatrix G = greens_numeric(op);

    for (int j = 0; j <= p.M; ++j) {
        REQUIRE(G.at(0, j) == 0.0);
        REQUIRE(G.at(p.M, j) == 0.0);
    }
    REQUIRE(G.symmetry_defect() <= 1e-10);
    REQUIRE(diag_lower_bound_constant(G) > 0.0);
    REQUIRE(growth_bound_constant(G) < 10.0);

    // operator monotonicity probe: G_{n,k}(r,r) >= G_{0,k}(r,r) nodewise
    ModelParams p0 = make_params(0, 1, 40.0, 320);
    GreensMatrix G0 = greens_numeric(assemble(p0, oracle::cached_soliton(0, 1)));
    for (int i = 1; i < p.M; ++i) REQUIRE(G.at(i, i) >= G0.at(i, i) - 1e-12);
}

TEST_CASE("greens_numeric refuses an indefinite operator", "[operator]") {
    ModelParams p = make_params(0, 1, 3.0, 64);
    DiscreteOperator op = assemble(p, oracle::cached_soliton(0, 1));
    for (double& d : op.matrix.diag) d -= 12.0; // shift the spectrum below zero
    REQUIRE_THROWS_AS(greens_numeric(op), std::runtime_error);
}

TEST_CASE("resolvent expansion residual", "[operator]") {
    SECTION("n = 0 has zero correction") {
        ModelParams p = make_params(0, 1, 20.0, 128);
        DiscreteOperator op = assemble(p, oracle::cached_soliton(0, 1));
        GreensMatrix G = greens_numeric(op);
        double res = resolvent_check(op, op, G, G, oracle::cached_soliton(0, 1));
        REQUIRE(res < 1e-14);
    }
    SECTION("(n,k) = (1,1): small residual shrinking at second order") {
        auto residual_at = [&](int M) {
            ModelParams p0 = make_params(0, 1, 40.0, M);
            ModelParams p1 = make_params(1, 1, 40.0, M);
            DiscreteOperator op0 = assemble(p0, oracle::cached_soliton(0, 1));
            DiscreteOperator op1 = assemble(p1, oracle::cached_soliton(1, 1));
            GreensMatrix G0 = greens_numeric(op0);
            GreensMatrix G1 = greens_numeric(op1);
            return resolvent_check(op0, op1, G0, G1, oracle::cached_soliton(1, 1));
        };
        double r200 = residual_at(200);
        double r400 = residual_at(400);
        REQUIRE(r400 < 4e-3);
        REQUIRE(std::log2(r200 / r400) > 1.8);
    }
}

TEST_CASE("coercivity radius search", "[operator]") {
    ModelParams p0 = make_params(0, 1, 40.0, 256);
    REQUIRE(find_R0(p0, oracle::cached_soliton(0, 1), 12.0) == Catch::Approx(2.0));

    ModelParams p1 = make_params(1, 1, 40.0, 256);
    double r0 = find_R0(p1, oracle::cached_soliton(1, 1), 20.0);
    REQUIRE(r0 >= 2.0);
    REQUIRE(r0 <= 20.0);
}

TEST_CASE("discrete Hardy inequality on random fields vanishing at r = 1", "[operator]") {
    RadialGrid g(40.0, 512);
    for (int trial = 0; trial < 100; ++trial) {
        // random walk from zero: rough but H^1-bounded realization
        Field z(g);
        for (int i = 1; i <= g.M; ++i)
            z.v[i] = z.v[i - 1] + std::sqrt(g.h) * rng::normal(91, trial, i);
        double num = 0.0, den = 0.0;
        for (int i = 0; i <= g.M; ++i) {
            double r = g.node(i);
            num += ((i == 0 || i == g.M) ? 0.5 : 1.0) * z.v[i] * z.v[i] / (r * r);
        }
        for (int i = 0; i < g.M; ++i) {
            double d = (z.v[i + 1] - z.v[i]) / g.h;
            den += d * d;
        }
        REQUIRE(num * g.h <= 4.0 * (1.0 + 5.0 * g.h) * den * g.h);
    }
}

TEST_CASE("Green's distance: coincidence, closed-form oracle, monotone trend", "[operator]") {
    double h = 0.125; // shared spacing; 5, 20, 40, 80 all sit on nodes

    auto greens_for = [&](int n, int k, double R) {
        ModelParams p = make_params(n, k, R, static_cast<int>(std::lround((R - 1.0) / h)));
        return greens_numeric(assemble(p, oracle::cached_soliton(n, k)));
    };

    GreensMatrix g20 = greens_for(0, 1, 20.0);
    REQUIRE(greens_distance(g20, g20, 5.0) == 0.0);

    GreensMatrix g40 = greens_for(0, 1, 40.0);
    double numeric = greens_distance(g20, g40, 5.0);

    // closed-form oracle on a fine independent quadrature
    int nq = 2000;
    double hq = 4.0 / nq, oracle_val = 0.0;
    for (int i = 0; i <= nq; ++i) {
        double wi = (i == 0 || i == nq) ? 0.5 : 1.0;
        double r = 1.0 + hq * i;
        for (int j = 0; j <= nq; ++j) {
            double wj = (j == 0 || j == nq) ? 0.5 : 1.0;
            double rho = 1.0 + hq * j;
            oracle_val += wi * wj * std::abs(greens_explicit(1, 20.0, r, rho) - greens_explicit(1, 40.0, r, rho));
        }
    }
    oracle_val *= hq * hq;
    REQUIRE(numeric == Catch::Approx(oracle_val).epsilon(0.02));

    GreensMatrix s20 = greens_for(1, 1, 20.0);
    GreensMatrix s40 = greens_for(1, 1, 40.0);
    GreensMatrix s80 = greens_for(1, 1, 80.0);
    double d2040 = greens_distance(s20, s40, 5.0);
    double d4080 = greens_distance(s40, s80, 5.0);
    REQUIRE(d2040 > d4080);
}
