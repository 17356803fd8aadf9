#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ewm/invariance.hpp"
#include "oracles.hpp"

using namespace ewm;

TEST_CASE("observables are deterministic functions of the state", "[invariance]") {
    ModelParams p;
    p.n = 1; p.k = 1; p.R = 20.0; p.M = 96;
    const SolitonProfile& sol = oracle::cached_soliton(1, 1);
    ProfileOnGrid prof = profile_on_grid(sol, p.grid());
    SpectralBasis basis = eigendecompose(assemble(p, sol));
    ObservableSet obs = make_observables(prof, basis);

    GaussianSampler sampler = make_sampler(p, basis);
    PhaseState st;
    st.psi = draw_sample(sampler, 3, 0);
    Ensemble w = sample_white_noise(p.R, p.M, 4, 1);
    st.W = w.samples[0];

    std::vector<double> a = obs.evaluate(st);
    std::vector<double> b = obs.evaluate(st);
    REQUIRE(a.size() == obs.names.size());
    REQUIRE(a == b);
}

TEST_CASE("T = 0 invariance comparison is exact", "[invariance]") {
    ModelParams p;
    p.n = 1; p.k = 1; p.R = 20.0; p.M = 64;
    InvarianceConfig cfg;
    cfg.sample_count = 400;
    cfg.T = 0.0;
    cfg.seed = 5;
    InvarianceReport rep = invariance_test_truncated(p, oracle::cached_soliton(1, 1), 4, cfg);
    REQUIRE(rep.all_pass);
    for (const ObservableStat& st : rep.stats) {
        REQUIRE(st.ks_distance == 0.0);
        REQUIRE(st.ks_p == 1.0);
        REQUIRE(st.moment_z == 0.0);
    }
}

TEST_CASE("truncated Gibbs measure is invariant under the truncated flow", "[invariance]") {
    ModelParams p;
    p.n = 1; p.k = 1; p.R = 20.0; p.M = 128;
    InvarianceConfig cfg;
    cfg.sample_count = 2000;
    cfg.T = 5.0;
    cfg.seed = 7;
    InvarianceReport rep = invariance_test_truncated(p, oracle::cached_soliton(1, 1), 4, cfg);
    REQUIRE(rep.ess > cfg.ess_floor);
    REQUIRE(rep.all_pass);

    REQUIRE_THROWS_AS(invariance_test_truncated(p, oracle::cached_soliton(1, 1), 64, cfg),
                      std::invalid_argument); // N > M/8
}

TEST_CASE("full flow invariance on a small ensemble", "[invariance]") {
    ModelParams p;
    p.n = 1; p.k = 1; p.R = 20.0; p.M = 128;
    InvarianceConfig cfg;
    cfg.sample_count = 2000;
    cfg.T = 5.0;
    cfg.seed = 11;
    InvarianceReport rep = invariance_test_full(p, oracle::cached_soliton(1, 1), cfg);
    REQUIRE(rep.all_pass);
    // moments at both ends agree within 3 combined standard errors
    for (const ObservableStat& st : rep.stats) REQUIRE(std::abs(st.moment_z) <= 3.5);
}

TEST_CASE("windowed norm of the zero state is zero", "[invariance]") {
    RadialGrid g(20.0, 128);
    PhaseState s;
    s.psi = Field(g);
    s.W = Field(g);
    REQUIRE(windowed_norm(s) == 0.0);
}

TEST_CASE("resolution probe", "[invariance]") {
    ModelParams p;
    p.n = 1; p.k = 1; p.R = 20.0; p.M = 256;

    SECTION("horizon beyond the reflection window is rejected") {
        REQUIRE_THROWS_AS(resolution_probe(p, oracle::cached_soliton(1, 1), {40.0}, 8, 1),
                          std::invalid_argument);
    }

    SECTION("Gibbs band and smooth decay") {
        ProbeReport rep = resolution_probe(p, oracle::cached_soliton(1, 1), {4.0, 8.0, 14.0}, 64, 13);
        REQUIRE(rep.gibbs_within_band);
        REQUIRE(rep.smooth_monotone_decay);
        REQUIRE(rep.smooth_norm[0] > 0.0);
        // deterministic run has shed most of the window norm by t = 14
        REQUIRE(rep.smooth_norm.back() < 0.5 * rep.smooth_norm[0]);
    }
}
