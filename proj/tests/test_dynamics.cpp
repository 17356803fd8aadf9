#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ewm/dynamics.hpp"
#include "ewm/measures.hpp"
#include "ewm/operator.hpp"
#include "oracles.hpp"

using namespace ewm;

namespace {

ProfileOnGrid profile_for(int n, int k, double R, int M) {
    return profile_on_grid(oracle::cached_soliton(n, k), RadialGrid(R, M));
}

PhaseState smooth_state(const RadialGrid& g, double amp = 0.5) {
    PhaseState s;
    s.psi = make_field(g, [&](double r) { return amp * std::sin(M_PI * (r - 1.0) / (g.R - 1.0)); });
    s.psi.v[0] = s.psi.v[g.M] = 0.0;
    s.W = make_field(g, [&](double r) {
        double om = 2.0 * M_PI / (g.R - 1.0);
        return 0.3 * (1.0 - std::cos(om * (r - 1.0))) / om;
    });
    return s;
}

} // namespace

TEST_CASE("nonlinearity: zero field, linearization rate, global bound", "[dynamics]") {
    ProfileOnGrid prof = profile_for(1, 1, 20.0, 128);
    const RadialGrid& g = prof.grid;

    Field zero(g);
    Field nz = nonlinearity(zero, prof);
    for (double v : nz.v) REQUIRE(v == 0.0);

    Field psi(g);
    for (int i = 1; i < g.M; ++i) psi.v[i] = rng::normal(12, 0, i);

    auto linearization_gap = [&](double eps) {
        Field scaled(g);
        for (int i = 0; i <= g.M; ++i) scaled.v[i] = eps * psi.v[i];
        Field nl = nonlinearity(scaled, prof);
        double worst = 0.0;
        for (int i = 0; i <= g.M; ++i)
            worst = std::max(worst, std::abs(nl.v[i] - eps * prof.potential[i] * psi.v[i]));
        return worst / eps;
    };
    double g2 = linearization_gap(1e-2);
    double g3 = linearization_gap(1e-3);
    REQUIRE(g2 / g3 > 5.0);   // gap/eps itself shrinks linearly in eps
    REQUIRE(g2 / g3 < 20.0);

    Field big(g);
    for (int i = 1; i < g.M; ++i) big.v[i] = 40.0 * rng::normal(13, 0, i);
    Field nb = nonlinearity(big, prof);
    for (int i = 0; i <= g.M; ++i)
        REQUIRE(std::abs(nb.v[i] / prof.inv_r[i]) <= 2.0 + 1e-12); // |r N| <= k(k+1)
}

TEST_CASE("zero data stays zero under every flow", "[dynamics]") {
    ProfileOnGrid prof = profile_for(1, 1, 20.0, 64);
    PhaseState s;
    s.psi = Field(prof.grid);
    s.W = Field(prof.grid);
    FlowConfig cfg;
    cfg.T = 3.0 * prof.grid.h;

    for (auto traj : {evolve(s, cfg, prof), evolve_linear(s, cfg, prof)}) {
        for (double v : traj.snapshots.back().psi.v) REQUIRE(v == 0.0);
    }
    FlowConfig tcfg = cfg;
    tcfg.N = 8;
    Trajectory tt = evolve_truncated(s, tcfg, prof);
    for (double v : tt.snapshots.back().psi.v) REQUIRE(v == 0.0);
}

TEST_CASE("potential-free standing wave is exact under cfl1", "[dynamics]") {
    int M = 256;
    ProfileOnGrid prof = profile_for(0, 0, 3.0, M);
    const RadialGrid& g = prof.grid;

    PhaseState s;
    s.psi = make_field(g, [&](double r) { return std::sin(M_PI * (r - 1.0) / (g.R - 1.0)); });
    s.psi.v[0] = s.psi.v[g.M] = 0.0;
    s.W = Field(g);

    FlowConfig cfg;
    cfg.T = g.R - 1.0; // half period: the mode returns negated
    Trajectory traj = evolve(s, cfg, prof);
    const Field& u = traj.snapshots.back().psi;
    for (int i = 0; i <= g.M; ++i) REQUIRE(u.v[i] == Catch::Approx(-s.psi.v[i]).margin(1e-10));
}

TEST_CASE("self-convergence of the nonlinear flow is second order", "[dynamics]") {
    double T = 4.75, R = 20.0;
    auto run = [&](int M) {
        ProfileOnGrid prof = profile_for(1, 1, R, M);
        PhaseState s = smooth_state(prof.grid);
        FlowConfig cfg;
        cfg.T = T;
        return evolve(s, cfg, prof).snapshots.back().psi;
    };
    Field u128 = run(128), u256 = run(256), u512 = run(512);

    auto diff = [](const Field& coarse, const Field& fine, int ratio) {
        double worst = 0.0;
        for (int i = 0; i <= coarse.grid.M; ++i)
            worst = std::max(worst, std::abs(coarse.v[i] - fine.v[i * ratio]));
        return worst;
    };
    double e1 = diff(u128, u256, 2);
    double e2 = diff(u256, u512, 2);
    REQUIRE(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("time reversal returns the initial position to scheme accuracy", "[dynamics]") {
    int M = 256;
    ProfileOnGrid prof = profile_for(1, 1, 20.0, M);
    PhaseState s = smooth_state(prof.grid);

    FlowConfig cfg;
    cfg.T = 4.75;
    Trajectory fwd = evolve(s, cfg, prof);
    PhaseState turn = fwd.snapshots.back();
    for (double& w : turn.W.v) w = -w;
    Trajectory back = evolve(turn, cfg, prof);

    double worst = 0.0;
    for (int i = 0; i <= M; ++i)
        worst = std::max(worst, std::abs(back.snapshots.back().psi.v[i] - s.psi.v[i]));
    REQUIRE(worst < 5e-3);
}

TEST_CASE("CFL violation and non-finite data are rejected", "[dynamics]") {
    ProfileOnGrid prof = profile_for(1, 1, 20.0, 64);
    PhaseState s = smooth_state(prof.grid);

    FlowConfig bad;
    bad.scheme = Scheme::leapfrog;
    bad.dt = 1.2 * prof.grid.h;
    bad.T = 1.0;
    REQUIRE_THROWS_AS(evolve(s, bad, prof), std::invalid_argument);

    FlowConfig cfl;
    cfl.scheme = Scheme::cfl1;
    cfl.dt = 0.5 * prof.grid.h;
    cfl.T = 1.0;
    REQUIRE_THROWS_AS(evolve(s, cfl, prof), std::invalid_argument);

    PhaseState inf_state = s;
    inf_state.psi.v[32] = std::numeric_limits<double>::infinity();
    FlowConfig cfg;
    cfg.T = 5.0 * prof.grid.h;
    REQUIRE_THROWS_AS(evolve(inf_state, cfg, prof), std::runtime_error);
}

TEST_CASE("full truncation reproduces the full flow", "[dynamics]") {
    int M = 64;
    ProfileOnGrid prof = profile_for(1, 1, 20.0, M);
    PhaseState s = smooth_state(prof.grid);
    FlowConfig cfg;
    cfg.T = 16 * prof.grid.h;

    Trajectory full = evolve(s, cfg, prof);
    FlowConfig tcfg = cfg;
    tcfg.N = M - 1;
    Trajectory trunc = evolve_truncated(s, tcfg, prof);
    for (int i = 0; i <= M; ++i)
        REQUIRE(trunc.snapshots.back().psi.v[i] ==
                Catch::Approx(full.snapshots.back().psi.v[i]).margin(1e-10));
}

TEST_CASE("free flow preserves the span of low sine modes", "[dynamics]") {
    int M = 128, N = 8;
    ProfileOnGrid prof = profile_for(0, 0, 20.0, M);
    const RadialGrid& g = prof.grid;
    SineBasis basis = make_sine_basis(g, N);

    Field psi(g);
    for (int i = 1; i < g.M; ++i) psi.v[i] = rng::normal(21, 0, i);
    PhaseState s;
    s.psi = project(psi, basis);
    s.W = Field(g);

    FlowConfig cfg;
    cfg.N = N;
    cfg.T = 32 * g.h;
    Trajectory traj = evolve_truncated(s, cfg, prof, basis);
    const Field& u = traj.snapshots.back().psi;
    Field pu = project(u, basis);
    for (int i = 0; i <= g.M; ++i) REQUIRE(u.v[i] == Catch::Approx(pu.v[i]).margin(1e-10));
}

TEST_CASE("Galerkin error halves per truncation doubling on rough data", "[dynamics]") {
    int M = 256;
    double R = 20.0;
    ModelParams p;
    p.n = 1; p.k = 1; p.R = R; p.M = M;
    ProfileOnGrid prof = profile_for(1, 1, R, M);
    DiscreteOperator op = assemble(p, oracle::cached_soliton(1, 1));
    GaussianSampler sampler = make_sampler(p, eigendecompose(op));
    Ensemble pos = sample_gaussian(sampler, 71, 8);
    Ensemble vel = sample_white_noise(R, M, 72, 8);

    FlowConfig cfg;
    cfg.T = 25 * prof.grid.h;
    std::vector<double> factors;
    for (int s = 0; s < 8; ++s) {
        PhaseState st;
        st.psi = pos.samples[s];
        st.W = vel.samples[s];
        Field ref = evolve(st, cfg, prof).snapshots.back().psi;
        std::vector<double> errs;
        for (int N : {16, 32, 64}) {
            FlowConfig tc = cfg;
            tc.N = N;
            Field ut = evolve_truncated(st, tc, prof).snapshots.back().psi;
            double worst = 0.0;
            for (int i = 0; i <= M; ++i) worst = std::max(worst, std::abs(ut.v[i] - ref.v[i]));
            errs.push_back(worst);
        }
        factors.push_back(errs[1] / errs[0]);
        factors.push_back(errs[2] / errs[1]);
    }
    REQUIRE(stats::median(factors) <= 0.85);
}

TEST_CASE("linearized flow oscillates eigenmodes at their frequencies", "[dynamics]") {
    double R = 20.0, T = 4.75;
    auto mode_error = [&](int M) {
        ModelParams p;
        p.n = 1; p.k = 1; p.R = R; p.M = M;
        ProfileOnGrid prof = profile_for(1, 1, R, M);
        SpectralBasis basis = eigendecompose(assemble(p, oracle::cached_soliton(1, 1)));
        int m = 2;
        PhaseState s;
        s.psi = Field(prof.grid);
        for (int i = 1; i < M; ++i) s.psi.v[i] = basis.mode(i - 1, m);
        s.W = Field(prof.grid);

        FlowConfig cfg;
        cfg.T = T;
        Field u = evolve_linear(s, cfg, prof).snapshots.back().psi;
        double coef = 0.0;
        for (int i = 1; i < M; ++i) coef += u.v[i] * basis.mode(i - 1, m);
        coef *= prof.grid.h;
        return std::abs(coef - std::cos(std::sqrt(basis.lambda2[m]) * T));
    };
    double e1 = mode_error(128), e2 = mode_error(256);
    REQUIRE(e2 < 1e-3);
    REQUIRE(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("linearized flow stays bounded on rough data", "[dynamics]") {
    int M = 256;
    double R = 20.0;
    ModelParams p;
    p.n = 1; p.k = 1; p.R = R; p.M = M;
    ProfileOnGrid prof = profile_for(1, 1, R, M);
    GaussianSampler sampler = make_sampler(p, eigendecompose(assemble(p, oracle::cached_soliton(1, 1))));

    PhaseState s;
    s.psi = draw_sample(sampler, 81, 0);
    s.W = Field(prof.grid);
    double n0 = holder_norm_c0(s.psi, 0.45, -0.55);

    FlowConfig cfg;
    cfg.T = 2.0 * R;
    Field u = evolve_linear(s, cfg, prof).snapshots.back().psi;
    double nT = holder_norm_c0(u, 0.45, -0.55);
    REQUIRE(nT <= 10.0 * n0); // < T >^{|kappa|} trend, constants not asserted
}

TEST_CASE("energy: zero state, decomposition identity, leapfrog drift", "[dynamics]") {
    SECTION("zero state has zero energy") {
        ProfileOnGrid prof = profile_for(1, 1, 20.0, 64);
        PhaseState s;
        s.psi = Field(prof.grid);
        s.W = Field(prof.grid);
        REQUIRE(energy(s, prof) == 0.0);
    }

    SECTION("E_{k,R}(phi) - E_{k,R}(Q,0) equals the psi-energy") {
        const SolitonProfile& sol = oracle::cached_soliton(1, 1);
        double R = 20.0;
        int M = 20000; // fine quadrature grid
        RadialGrid g(R, M);
        ProfileOnGrid prof = profile_on_grid(sol, g);

        Field psi = make_field(g, [&](double r) { return 0.7 * std::sin(M_PI * (r - 1.0) / (R - 1.0)); });
        Field psit = make_field(g, [&](double r) { return 0.4 * std::sin(2.0 * M_PI * (r - 1.0) / (R - 1.0)); });

        auto dr_central = [&](const Field& f, int i) {
            if (i == 0) return (f.v[1] - f.v[0]) / g.h;
            if (i == M) return (f.v[M] - f.v[M - 1]) / g.h;
            return (f.v[i + 1] - f.v[i - 1]) / (2.0 * g.h);
        };

        // E_{k,R}(phi, phi_t) - E_{k,R}(Q, 0) with phi = Q + psi/r, phi_t = psi_t/r
        double lhs = 0.0;
        for (int i = 0; i <= M; ++i) {
            double r = g.node(i);
            double w = (i == 0 || i == M) ? 0.5 : 1.0;
            double qp = sol.derivative_at(r);
            double phi_r = qp + dr_central(psi, i) / r - psi.v[i] / (r * r);
            double phi_t = psit.v[i] / r;
            double sphi = std::sin(prof.Q[i] + psi.v[i] / r);
            double sq = std::sin(prof.Q[i]);
            double e_phi = r * r * (phi_t * phi_t + phi_r * phi_r) + 2.0 * sphi * sphi;
            double e_q = r * r * qp * qp + 2.0 * sq * sq;
            lhs += w * 0.5 * (e_phi - e_q);
        }
        lhs *= g.h;

        // psi-side: quadratic energy plus the remainder potential
        double rhs = 0.0;
        for (int i = 0; i <= M; ++i) {
            double w = (i == 0 || i == M) ? 0.5 : 1.0;
            double dpsi = dr_central(psi, i);
            rhs += w * 0.5 * (psit.v[i] * psit.v[i] + dpsi * dpsi + prof.potential[i] * psi.v[i] * psi.v[i]);
        }
        rhs *= g.h;
        rhs += potential_V(psi, R, prof);

        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-4 * std::max(1.0, std::abs(rhs))));
    }

    SECTION("leapfrog energy drift stays below 1e-4 over T = 2R") {
        int M = 512;
        ProfileOnGrid prof = profile_for(1, 1, 20.0, M);
        PhaseState s = smooth_state(prof.grid);

        FlowConfig cfg;
        cfg.scheme = Scheme::leapfrog;
        cfg.dt = 0.5 * prof.grid.h;
        cfg.T = 2.0 * prof.grid.R;
        int snaps = 20;
        for (int j = 0; j <= snaps; ++j) cfg.snapshot_times.push_back(cfg.T * j / snaps);
        Trajectory traj = evolve(s, cfg, prof);

        double emin = traj.energy_trace[0], emax = traj.energy_trace[0];
        for (double e : traj.energy_trace) {
            emin = std::min(emin, e);
            emax = std::max(emax, e);
        }
        REQUIRE((emax - emin) / std::abs(traj.energy_trace[0]) <= 1e-4);
    }
}

TEST_CASE("finite speed of propagation", "[dynamics]") {
    int M = 304;
    double R = 20.0; // h = 0.0625: K, L, M_outer all on nodes
    const SolitonProfile& sol = oracle::cached_soliton(1, 1);
    RadialGrid g(R, M);

    SECTION("t = 0 compares the data with itself") {
        PhaseState s = smooth_state(g);
        REQUIRE(finite_speed_check(s, sol, 0.0, 2.0, 5.0, 10.0) == 0.0);
    }

    SECTION("smooth localized data") {
        PhaseState s;
        s.psi = make_field(g, [](double r) {
            double x = (r - 2.5) / 1.0;
            return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
        });
        s.psi.v[0] = s.psi.v[g.M] = 0.0;
        s.W = Field(g);
        REQUIRE(finite_speed_check(s, sol, 1.0, 2.0, 5.0, 10.0) <= 1e-10);
    }

    SECTION("Gibbs-typical data") {
        ModelParams p;
        p.n = 1; p.k = 1; p.R = R; p.M = M;
        GaussianSampler sampler = make_sampler(p, eigendecompose(assemble(p, sol)));
        PhaseState s;
        s.psi = draw_sample(sampler, 91, 0);
        Ensemble w = sample_white_noise(R, M, 92, 1);
        s.W = w.samples[0];
        REQUIRE(finite_speed_check(s, sol, 1.0, 2.0, 5.0, 10.0) <= 1e-10);
    }

    SECTION("window violation is rejected") {
        PhaseState s = smooth_state(g);
        REQUIRE_THROWS_AS(finite_speed_check(s, sol, 3.0, 2.0, 5.0, 10.0), std::invalid_argument);
    }
}
