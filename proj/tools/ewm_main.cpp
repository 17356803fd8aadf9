// Command-line front end: soliton profiles, Green's functions, Gaussian and
// Gibbs sampling, wave evolution, invariance diagnostics, and the acceptance
// suite. Every report embeds the version string, the resolved configuration,
// and the seed; reruns with identical configurations are byte-identical.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ewm/acceptance.hpp"
#include "ewm/dynamics.hpp"
#include "ewm/gibbs.hpp"
#include "ewm/invariance.hpp"
#include "ewm/io.hpp"
#include "ewm/measures.hpp"
#include "ewm/operator.hpp"
#include "ewm/soliton.hpp"
#include "ewm/version.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    ewm::ModelParams params;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    int truncation = 0; // 0 = none
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--n", opts.params.n, "topological degree (default 1)");
    cmd->add_option("--k", opts.params.k, "equivariance index (default 1)");
    cmd->add_option("--R", opts.params.R, "outer radius (default 40)");
    cmd->add_option("--M", opts.params.M, "grid intervals (default 1024)");
    cmd->add_option("--seed", opts.seed, "RNG seed (default 42)");
    cmd->add_option("--out-dir", opts.out_dir, "output directory (env EWM_OUT_DIR)");
}

std::string resolve_out_dir(const CommonOpts& opts) {
    std::string dir = opts.out_dir;
    if (dir == ".") {
        if (const char* env = std::getenv("EWM_OUT_DIR")) dir = env;
    }
    std::filesystem::create_directories(dir);
    return dir;
}

json resolved_config(const CommonOpts& opts, const std::string& subcommand) {
    json j;
    j["version"] = ewm::kVersion;
    j["subcommand"] = subcommand;
    j["params"] = ewm::io::params_to_json(opts.params);
    j["seed"] = opts.seed;
    return j;
}

ewm::SolitonProfile profile_for(const CommonOpts& opts, double r_far = 200.0) {
    return ewm::compute_soliton(opts.params.n, opts.params.k, std::max(r_far, 2.0 * opts.params.R));
}

int run_soliton(const CommonOpts& opts, double r_far, double tol) {
    ewm::SolitonProfile prof = ewm::compute_soliton(opts.params.n, opts.params.k, r_far, tol);
    std::string dir = resolve_out_dir(opts);

    std::string csv_path = dir + "/soliton.csv";
    std::FILE* f = std::fopen(csv_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + csv_path);
    std::fprintf(f, "r,Q,Qprime,residual\n");
    const double kk = static_cast<double>(prof.k) * (prof.k + 1);
    for (int i = 0; i < prof.nodes(); i += 4) {
        double r = prof.radius(i);
        double res = 0.0;
        if (i > 0 && i + 1 < prof.nodes()) {
            double d2 = (prof.Q[i + 1] - 2.0 * prof.Q[i] + prof.Q[i - 1]) / (prof.step * prof.step);
            double d1 = (prof.Q[i + 1] - prof.Q[i - 1]) / (2.0 * prof.step);
            res = -d2 - 2.0 / r * d1 + kk / (2.0 * r * r) * std::sin(2.0 * prof.Q[i]);
        }
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g\n", r, prof.Q[i], prof.Qp[i], res);
    }
    std::fclose(f);

    json summary = resolved_config(opts, "soliton");
    summary["r_far"] = r_far;
    summary["alpha"] = prof.alpha;
    summary["energy"] = ewm::energy_of(prof, r_far);
    if (prof.n >= 1) {
        ewm::AsymptoticFit fit = ewm::asymptotic_fit(prof);
        summary["decay_slope"] = fit.decay_slope;
    }
    ewm::io::write_json(dir + "/soliton.json", summary);
    std::printf("soliton: alpha=%.9f, outputs in %s\n", prof.alpha, dir.c_str());
    return 0;
}

int run_greens(const CommonOpts& opts) {
    ewm::SolitonProfile sol = profile_for(opts);
    ewm::DiscreteOperator op = ewm::assemble(opts.params, sol);
    ewm::GreensMatrix G = ewm::greens_numeric(op);
    std::string dir = resolve_out_dir(opts);

    std::string csv_path = dir + "/greens.csv";
    std::FILE* f = std::fopen(csv_path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + csv_path);
    for (int i = 0; i <= opts.params.M; ++i)
        for (int j = 0; j <= opts.params.M; ++j)
            std::fprintf(f, "%.17g%c", G.at(i, j), j == opts.params.M ? '\n' : ',');
    std::fclose(f);

    json rep = resolved_config(opts, "greens");
    rep["symmetry_defect"] = G.symmetry_defect();
    rep["growth_bound"] = ewm::growth_bound_constant(G);
    rep["diag_lower_bound_c"] = ewm::diag_lower_bound_constant(G);
    rep["derivative_bound"] = ewm::derivative_bound_constant(G);
    rep["R0"] = ewm::find_R0(opts.params, sol, std::min(opts.params.R, 20.0));
    ewm::io::write_json(dir + "/greens.json", rep);
    std::printf("greens: %dx%d matrix written to %s\n", opts.params.M + 1, opts.params.M + 1, dir.c_str());
    return 0;
}

int run_sample(const CommonOpts& opts, int count) {
    ewm::SolitonProfile sol = profile_for(opts);
    ewm::DiscreteOperator op = ewm::assemble(opts.params, sol);
    ewm::GaussianSampler sampler = ewm::make_sampler(opts.params, ewm::eigendecompose(op));
    ewm::Ensemble e = ewm::sample_gaussian(sampler, opts.seed, count);
    std::string dir = resolve_out_dir(opts);
    ewm::io::write_ensemble(dir + "/ensemble.bin", e);

    json rep = resolved_config(opts, "sample");
    rep["count"] = count;
    if (count >= 4) {
        ewm::GrowthHolderReport gh = ewm::growth_and_holder_diagnostic(e, 0.05);
        rep["growth_median"] = gh.growth_median;
        rep["growth_q90"] = gh.growth_q90;
        ewm::GrowthHolderReport gh10 = ewm::growth_and_holder_diagnostic(e, 0.10);
        rep["holder_median"] = gh10.holder_median;
        rep["holder_q90"] = gh10.holder_q90;
    }
    ewm::io::write_json(dir + "/sample.json", rep);
    std::printf("sample: %d fields written to %s\n", count, dir.c_str());
    return 0;
}

int run_gibbs(const CommonOpts& opts, const std::string& sampler_kind, double q, double L, int steps,
              double beta, int count) {
    ewm::SolitonProfile sol = profile_for(opts);
    ewm::ProfileOnGrid prof = ewm::profile_on_grid(sol, opts.params.grid());
    ewm::DiscreteOperator op = ewm::assemble(opts.params, sol);
    ewm::GaussianSampler sampler = ewm::make_sampler(opts.params, ewm::eigendecompose(op));
    double Luse = (L > 0.0) ? L : opts.params.R;
    std::string dir = resolve_out_dir(opts);

    json rep = resolved_config(opts, "gibbs");
    rep["sampler"] = sampler_kind;
    rep["q"] = q;
    rep["L"] = Luse;

    ewm::WeightedEnsemble we;
    if (sampler_kind == "pcn") {
        ewm::PcnConfig cfg;
        cfg.beta = beta;
        cfg.seed = opts.seed;
        ewm::PcnStats st;
        we = ewm::pcn_sample(sampler, cfg, Luse, prof, steps, &st);
        rep["acceptance_rate"] = st.acceptance_rate;
        rep["rate_warning"] = st.rate_warning;
    } else {
        ewm::Ensemble e = ewm::sample_gaussian(sampler, opts.seed, count);
        we = ewm::gibbs_reweight(std::move(e), Luse, prof);
    }
    rep["zhat"] = we.zhat;
    rep["zhat_stderr"] = we.zhat_stderr;
    rep["ess"] = we.ess;
    if (!we.note.empty()) rep["note"] = we.note;

    ewm::ExpMomentResult mom = ewm::exp_moment(we.base, q, Luse, prof);
    rep["exp_moment"] = {{"q", q}, {"estimate", mom.estimate}, {"stderr", mom.stderr_est},
                         {"above_threshold", mom.above_threshold}};

    int var_count = std::min(we.base.count(), 100);
    if (var_count > 0 && q > 0.0) {
        ewm::Ensemble subset;
        subset.params = we.base.params;
        subset.grid = we.base.grid;
        subset.samples.assign(we.base.samples.begin(), we.base.samples.begin() + var_count);
        ewm::VariationalResult vr = ewm::variational_lower_bound(subset, q, Luse, prof, op);
        rep["variational_bound"] = vr.average;
    }

    ewm::io::write_ensemble(dir + "/gibbs_ensemble.bin", we.base);
    ewm::io::write_json(dir + "/gibbs.json", rep);
    std::printf("gibbs (%s): Z=%.4f ESS=%.1f, outputs in %s\n", sampler_kind.c_str(), we.zhat, we.ess,
                dir.c_str());
    return 0;
}

int run_evolve(const CommonOpts& opts, const std::string& scheme, double dt, double T,
               const std::vector<double>& snapshots, const std::string& input, int index) {
    ewm::SolitonProfile sol = profile_for(opts);
    ewm::RadialGrid g = opts.params.grid();
    ewm::PhaseState state;
    if (!input.empty()) {
        ewm::Ensemble e = ewm::io::read_ensemble(input);
        state.psi = e.samples.at(index);
        g = state.psi.grid;
        state.W = ewm::Field(g);
    } else {
        state.psi = ewm::make_field(g, [&](double r) {
            double a = 1.25, b = 0.25 * (g.R - 1.0) + 1.0;
            if (r <= a || r >= b) return 0.0;
            double x = 2.0 * (r - a) / (b - a) - 1.0;
            return 0.4 * std::exp(-1.0 / (1.0 - x * x));
        });
        state.W = ewm::Field(g);
    }
    ewm::ProfileOnGrid prof = ewm::profile_on_grid(sol, g);

    ewm::FlowConfig cfg;
    cfg.scheme = (scheme == "leapfrog") ? ewm::Scheme::leapfrog : ewm::Scheme::cfl1;
    cfg.dt = dt;
    cfg.T = T;
    cfg.snapshot_times = snapshots;
    if (cfg.snapshot_times.empty()) cfg.snapshot_times = {T};
    if (opts.truncation > 0) cfg.N = opts.truncation;

    ewm::Trajectory traj = opts.truncation > 0 ? ewm::evolve_truncated(state, cfg, prof)
                                               : ewm::evolve(state, cfg, prof);
    std::string dir = resolve_out_dir(opts);
    ewm::io::write_trajectory_frames(dir + "/trajectory.bin", traj.snapshots);

    json manifest = resolved_config(opts, "evolve");
    manifest["scheme"] = scheme;
    manifest["T"] = T;
    manifest["dt"] = dt == 0.0 ? g.h : dt;
    manifest["frames"] = traj.snapshots.size();
    manifest["snapshot_times"] = cfg.snapshot_times;
    manifest["energy_trace"] = traj.energy_trace;
    if (opts.truncation > 0) manifest["N"] = opts.truncation;
    ewm::io::write_json(dir + "/trajectory.json", manifest);
    std::printf("evolve: %zu frames written to %s\n", traj.snapshots.size(), dir.c_str());
    return 0;
}

json invariance_report_json(const ewm::InvarianceReport& rep) {
    json stats = json::array();
    for (const auto& st : rep.stats)
        stats.push_back({{"name", st.name}, {"ks_distance", st.ks_distance}, {"ks_p", st.ks_p},
                         {"moment_z", st.moment_z}, {"pass", st.ks_pass}});
    return {{"observables", stats}, {"bonferroni_level", rep.bonferroni_level},
            {"ess", rep.ess}, {"all_pass", rep.all_pass}, {"T", rep.T},
            {"sample_count", rep.sample_count}};
}

int run_invariance(const CommonOpts& opts, int N, double T, int count) {
    ewm::SolitonProfile sol = profile_for(opts);
    ewm::InvarianceConfig cfg;
    cfg.sample_count = count;
    cfg.T = T;
    cfg.seed = opts.seed;
    ewm::InvarianceReport rep = (N > 0) ? ewm::invariance_test_truncated(opts.params, sol, N, cfg)
                                        : ewm::invariance_test_full(opts.params, sol, cfg);
    json out = resolved_config(opts, "invariance");
    out["truncation"] = N;
    out["report"] = invariance_report_json(rep);
    std::string dir = resolve_out_dir(opts);
    ewm::io::write_json(dir + "/invariance.json", out);
    std::printf("invariance (%s): %s\n", N > 0 ? "truncated" : "full", rep.all_pass ? "pass" : "FAIL");
    return rep.all_pass ? 0 : 1;
}

int run_probe(const CommonOpts& opts, std::vector<double> times, int count) {
    ewm::SolitonProfile sol = profile_for(opts);
    if (times.empty()) times = {10.0, 20.0, 40.0};
    ewm::ProbeReport rep = ewm::resolution_probe(opts.params, sol, times, count, opts.seed);

    json out = resolved_config(opts, "probe");
    out["times"] = rep.times;
    out["gibbs_median_norm"] = rep.gibbs_median;
    out["smooth_norm"] = rep.smooth_norm;
    out["band_ratio_max"] = rep.band_ratio_max;
    out["gibbs_within_band"] = rep.gibbs_within_band;
    out["smooth_monotone_decay"] = rep.smooth_monotone_decay;
    std::string dir = resolve_out_dir(opts);
    ewm::io::write_json(dir + "/probe.json", out);
    std::printf("probe: band=%.3f within=%d smooth decay=%d\n", rep.band_ratio_max,
                rep.gibbs_within_band, rep.smooth_monotone_decay);
    return (rep.gibbs_within_band && rep.smooth_monotone_decay) ? 0 : 1;
}

int run_accept(const CommonOpts& opts, const std::string& fault) {
    ewm::acceptance::Options aopt;
    aopt.seed = opts.seed;
    aopt.fault = fault;

    int failures = 0;
    json rows = json::array();
    ewm::acceptance::run_all(aopt, [&](const ewm::acceptance::CriterionResult& r) {
        std::printf("%s  criterion %2d: %s  [%.1fs]  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
        rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    });

    json out = resolved_config(opts, "accept");
    out["criteria"] = rows;
    out["failures"] = failures;
    if (!fault.empty()) out["injected_fault"] = fault;
    std::string dir = resolve_out_dir(opts);
    ewm::io::write_json(dir + "/acceptance.json", out);

    std::string summary;
    for (const auto& row : rows)
        summary += (row["pass"].get<bool>() ? "PASS" : "FAIL") + std::string("  criterion ") +
                   std::to_string(row["id"].get<int>()) + ": " + row["name"].get<std::string>() + "\n";
    ewm::io::write_text(dir + "/acceptance.txt", summary);
    std::printf("%d/%zu criteria passed; reports in %s\n",
                static_cast<int>(rows.size()) - failures, rows.size(), dir.c_str());
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for exterior equivariant wave maps"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonOpts opts;

    auto* soliton = app.add_subcommand("soliton", "compute a topological soliton profile");
    double r_far = 200.0, tol = 1e-4;
    add_common(soliton, opts);
    soliton->add_option("--rfar", r_far, "far-field radius (default 200)");
    soliton->add_option("--tol", tol, "residual tolerance");

    auto* greens = app.add_subcommand("greens", "Green's matrix and bound constants");
    add_common(greens, opts);

    auto* sample = app.add_subcommand("sample", "draw Gaussian-measure samples");
    int count = 100;
    add_common(sample, opts);
    sample->add_option("--count", count, "sample count (default 100)");

    auto* gibbs = app.add_subcommand("gibbs", "Gibbs sampling and diagnostics");
    std::string sampler_kind = "reweight";
    double q = 1.0, L = 0.0, beta = 0.3;
    int steps = 5000;
    add_common(gibbs, opts);
    gibbs->add_option("--sampler", sampler_kind, "reweight or pcn")
        ->check(CLI::IsMember({"reweight", "pcn"}));
    gibbs->add_option("--q", q, "exponential moment parameter");
    gibbs->add_option("--L", L, "potential window (default R)");
    gibbs->add_option("--steps", steps, "pCN steps");
    gibbs->add_option("--beta", beta, "pCN step parameter");
    gibbs->add_option("--count", count, "reweighting sample count");

    auto* evolve = app.add_subcommand("evolve", "evolve the nonlinear flow");
    std::string scheme = "cfl1", input;
    double dt = 0.0, T = 10.0;
    int index = 0;
    std::vector<double> snapshots;
    add_common(evolve, opts);
    evolve->add_option("--scheme", scheme, "cfl1 or leapfrog")->check(CLI::IsMember({"cfl1", "leapfrog"}));
    evolve->add_option("--dt", dt, "time step (default: scheme choice)");
    evolve->add_option("--T", T, "final time");
    evolve->add_option("--N", opts.truncation, "Galerkin truncation (0 = full flow)");
    evolve->add_option("--snapshots", snapshots, "snapshot times");
    evolve->add_option("--input", input, "ensemble binary supplying initial data");
    evolve->add_option("--index", index, "sample index within --input");

    auto* invariance = app.add_subcommand("invariance", "distributional invariance test");
    int trunc_n = 0, inv_count = 2000;
    double inv_T = 10.0;
    add_common(invariance, opts);
    invariance->add_option("--N", trunc_n, "truncation (0 = full flow)");
    invariance->add_option("--T", inv_T, "evolution time");
    invariance->add_option("--count", inv_count, "sample count");

    auto* probe = app.add_subcommand("probe", "soliton-resolution-failure probe");
    std::vector<double> probe_times;
    int probe_count = 256;
    add_common(probe, opts);
    probe->add_option("--times", probe_times, "horizon times (default 10 20 40)");
    probe->add_option("--count", probe_count, "ensemble size");

    auto* accept = app.add_subcommand("accept", "run the acceptance suite");
    std::string fault;
    add_common(accept, opts);
    accept->add_option("--inject-fault", fault, "fault-injection hook (negative control)")
        ->group(""); // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        opts.params.validate();
        if (soliton->parsed()) return run_soliton(opts, r_far, tol);
        if (greens->parsed()) return run_greens(opts);
        if (sample->parsed()) return run_sample(opts, count);
        if (gibbs->parsed()) return run_gibbs(opts, sampler_kind, q, L, steps, beta, count);
        if (evolve->parsed()) return run_evolve(opts, scheme, dt, T, snapshots, input, index);
        if (invariance->parsed()) return run_invariance(opts, trunc_n, inv_T, inv_count);
        if (probe->parsed()) return run_probe(opts, probe_times, probe_count);
        if (accept->parsed()) return run_accept(opts, fault);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    }
    return 0;
}
