// SPDX-License-Identifier: MIT
//
// Command-line front end. Machine-readable results go to stdout (plain
// value by default, a JSON document with --json); human-oriented tables
// and progress go to stderr. Exit codes: 0 all assertions passed, 1 an
// assertion failed, 2 usage or IO error. Every randomized command takes an
// explicit --seed (or reads one from its config); there is no entropy
// default, so identical invocations produce identical bytes.
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aot/adapted.hpp"
#include "aot/estimators.hpp"
#include "aot/examples.hpp"
#include "aot/experiments.hpp"
#include "aot/gaussian.hpp"
#include "aot/path_measure.hpp"
#include "aot/random_instances.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << '\n';
}

// ============================================================================
// verify
// ============================================================================

struct VerifyRow {
    std::string name;
    double expected = 0.0;
    double computed = 0.0;
    double tol = 1e-9;
    bool pass = false;
};

std::vector<VerifyRow> verify_rows(double eps) {
    std::vector<VerifyRow> rows;
    auto add = [&](const std::string& name, double expected, double computed, double tol) {
        rows.push_back({name, expected, computed, tol, std::abs(expected - computed) <= tol});
    };

    {
        auto p = aot::examples::conditional_gap_pair(eps);
        add("conditional_gap/w1", eps, aot::w1(p.mu, p.nu), 1e-9);
        const double dp = aot::aw1_value(p.mu, p.nu);
        add("conditional_gap/aw1", 1.0 + eps, dp, 1e-9);
        add("conditional_gap/aw1_lp_gap", 0.0,
            dp - aot::bicausal_lp_oracle(p.mu, p.nu, aot::sum_norm_cost), 1e-7);
    }
    {
        auto p = aot::examples::tail_blowup_pair(eps);
        add("tail_blowup/tv1", 2.0 * eps * eps, aot::tv1_closed_form(p.mu, p.nu), 1e-9);
        const double dp = aot::av1(p.mu, p.nu);
        add("tail_blowup/av1", aot::examples::tail_blowup_av1(eps), dp, 1e-9);
        add("tail_blowup/av1_lp_gap", 0.0,
            dp - aot::bicausal_lp_oracle(p.mu, p.nu, aot::indicator_weighted_cost), 1e-7);
    }
    {
        auto f = aot::examples::nonconvexity_family(eps);
        add("nonconvexity/aw1_nu1", 0.0, aot::aw1_value(f.mu, f.nu1), 1e-9);
        add("nonconvexity/aw1_nu2", 2.0 * eps, aot::aw1_value(f.mu, f.nu2), 1e-9);
        const double mix = aot::aw1_value(f.mu, f.mix);
        add("nonconvexity/aw1_mix", 1.0, mix, 1e-9);
        const double avg = 0.5 * (aot::aw1_value(f.mu, f.nu1) + aot::aw1_value(f.mu, f.nu2));
        add("nonconvexity/convexity_violated", 1.0, mix > avg + 1e-9 ? 1.0 : 0.0, 0.0);
    }
    return rows;
}

int run_verify(const std::vector<double>& eps_list, bool inject_error, bool as_json) {
    std::vector<VerifyRow> rows;
    for (double eps : eps_list) {
        auto batch = verify_rows(eps);
        for (auto& r : batch) {
            r.name = "eps=" + std::to_string(eps).substr(0, 4) + "/" + r.name;
            rows.push_back(r);
        }
    }
    if (inject_error && !rows.empty()) {
        rows[0].expected += 0.5;
        rows[0].pass = std::abs(rows[0].expected - rows[0].computed) <= rows[0].tol;
    }

    int failures = 0;
    std::fprintf(stderr, "%-42s %16s %16s %6s\n", "case", "expected", "computed", "ok");
    for (const auto& r : rows) {
        if (!r.pass) ++failures;
        std::fprintf(stderr, "%-42s %16.10g %16.10g %6s\n", r.name.c_str(), r.expected, r.computed,
                     r.pass ? "pass" : "FAIL");
    }

    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows)
            j.push_back({{"case", r.name},
                         {"expected", r.expected},
                         {"computed", r.computed},
                         {"tol", r.tol},
                         {"pass", r.pass}});
        std::printf("%s\n", nlohmann::json({{"results", j}, {"failures", failures}}).dump(2).c_str());
    } else {
        std::printf("%s\n", failures == 0 ? "PASS" : "FAIL");
    }
    return failures == 0 ? kExitPass : kExitFail;
}

// ============================================================================
// dist
// ============================================================================

nlohmann::json coupling_to_json(const aot::Coupling& c) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.m; ++j)
            if (c.at(i, j) > 1e-15) entries.push_back({i, j, c.at(i, j)});
    return {{"rows", c.n}, {"cols", c.m}, {"entries", std::move(entries)}};
}

int run_dist(const std::string& file_a, const std::string& file_b, const std::string& metric,
             const std::string& coupling_out, bool as_json) {
    const aot::DiscretePathMeasure mu = aot::measure_from_json(load_json_file(file_a));
    const aot::DiscretePathMeasure nu = aot::measure_from_json(load_json_file(file_b));

    double value = 0.0;
    if (metric == "w1") {
        value = aot::w1(mu, nu);
    } else if (metric == "tv") {
        value = aot::tv(mu, nu);
    } else if (metric == "tv1") {
        value = aot::tv1_closed_form(mu, nu);
    } else if (metric == "av1") {
        value = aot::av1(mu, nu);
    } else if (metric == "aw1") {
        value = aot::aw1_value(mu, nu);
    } else {
        throw std::invalid_argument("unknown metric: " + metric);
    }

    if (!coupling_out.empty()) {
        aot::Coupling plan;
        if (metric == "w1") {
            plan = aot::w1_solution(mu, nu).coupling;
        } else if (metric == "aw1") {
            plan = aot::aw1_coupling(mu, nu);
        } else if (metric == "av1") {
            plan = aot::av1_coupling(mu, nu);
        } else {
            // indicator-type costs: the exact transport plan
            aot::CostMatrix c(mu.size(), nu.size());
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = 0; j < nu.size(); ++j) {
                    if (mu.atom(i).path == nu.atom(j).path) continue;
                    c.at(i, j) = metric == "tv"
                                     ? 1.0
                                     : aot::sum_norm(mu.atom(i).path) +
                                           aot::sum_norm(nu.atom(j).path) + 1.0;
                }
            std::vector<double> wa, wb;
            for (const aot::Atom& a : mu.atoms()) wa.push_back(a.weight);
            for (const aot::Atom& a : nu.atoms()) wb.push_back(a.weight);
            plan = aot::solve_ot(c, wa, wb).coupling;
        }
        write_json_file(coupling_out, coupling_to_json(plan));
    }

    if (as_json)
        std::printf("%s\n", nlohmann::json({{"metric", metric}, {"value", value}}).dump().c_str());
    else
        std::printf("%.12g\n", value);
    return kExitPass;
}

// ============================================================================
// estimate
// ============================================================================

std::vector<aot::Path> samples_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    const int T = j.at("T").get<int>();
    std::vector<aot::Path> out;
    for (const auto& js : j.at("samples")) {
        if (static_cast<int>(js.size()) != T)
            throw std::invalid_argument("samples json: path must have T stages");
        std::vector<double> coords;
        for (const auto& stage : js) {
            if (static_cast<int>(stage.size()) != d)
                throw std::invalid_argument("samples json: stage must have d entries");
            for (const auto& c : stage) coords.push_back(c.get<double>());
        }
        out.emplace_back(d, T, std::move(coords));
    }
    if (out.empty()) throw std::invalid_argument("samples json: empty sample list");
    return out;
}

int run_estimate(const std::string& spec_file, const std::string& samples_file,
                 const std::string& model_file, std::uint64_t seed, const std::string& out_file,
                 bool as_json) {
    aot::EstimatorSpec spec = aot::estimator_spec_from_json(load_json_file(spec_file));

    std::vector<aot::Path> samples;
    if (!samples_file.empty()) {
        samples = samples_from_json(load_json_file(samples_file));
        if (spec.N == 0) spec.N = samples.size();
    } else {
        if (spec.N < 1) throw std::invalid_argument("estimate: spec must carry N when sampling");
        const aot::GaussianMixture model = aot::mixture_from_json(load_json_file(model_file));
        aot::SeededSampler sample_rng(seed, aot::stream_hash(0x6573742d73616dull));
        samples = aot::mixture_sample(sample_rng, model, spec.N);
    }

    aot::SeededSampler noise(seed, aot::stream_hash(0x6573742d6e6full));
    const aot::DiscretePathMeasure est = aot::build_estimator(spec, samples, noise);
    const aot::ResolvedSchedule sched =
        aot::resolve_schedule(spec, samples[0].d, samples[0].T);

    if (!out_file.empty()) write_json_file(out_file, aot::measure_to_json(est));

    nlohmann::json summary = {{"kind", aot::kind_name(spec.kind)},
                              {"N", spec.N},
                              {"M", spec.M},
                              {"atoms", est.size()},
                              {"sigma", sched.sigma},
                              {"delta", sched.delta}};
    if (as_json)
        std::printf("%s\n", summary.dump().c_str());
    else
        std::printf("atoms=%zu sigma=%.12g delta=%.12g\n", est.size(), sched.sigma, sched.delta);
    return kExitPass;
}

// ============================================================================
// converge
// ============================================================================

int run_converge(const std::string& config_file, std::uint64_t seed, bool seed_given,
                 const std::string& out_override, bool as_json) {
    aot::ExperimentConfig cfg = aot::experiment_config_from_json(load_json_file(config_file));
    if (seed_given) cfg.seed = seed;
    if (!out_override.empty()) cfg.report_out = out_override;

    const aot::RateReport rep = aot::run_convergence(cfg);
    bool pass = true;
    if (cfg.slope_band)
        pass = rep.slope >= cfg.slope_band->first && rep.slope <= cfg.slope_band->second;

    std::fprintf(stderr, "n_points=%zu slope=%.6g r2=%.6g inversions=%d\n", rep.per_n.size(),
                 rep.slope, rep.r2, rep.mean_inversions);

    nlohmann::json j = {{"slope", rep.slope},
                        {"intercept", rep.intercept},
                        {"r2", rep.r2},
                        {"theoretical_slope", rep.theoretical_slope},
                        {"mean_inversions", rep.mean_inversions},
                        {"pass", pass}};
    if (cfg.slope_band) j["slope_band"] = {cfg.slope_band->first, cfg.slope_band->second};
    if (as_json)
        std::printf("%s\n", j.dump().c_str());
    else
        std::printf("%s slope=%.12g\n", pass ? "PASS" : "FAIL", rep.slope);
    return pass ? kExitPass : kExitFail;
}

// ============================================================================
// oracle-check
// ============================================================================

int run_oracle_check(std::uint64_t seed, int count, bool as_json) {
    aot::SeededSampler s(seed, 0x6f7261636c65ull);
    double max_aw_gap = 0.0, max_av_gap = 0.0, max_tv_gap = 0.0;
    int domination_violations = 0;
    for (int k = 0; k < count; ++k) {
        const auto mu = aot::random_lattice_measure(s, 1, 2, 4);
        const auto nu = aot::random_lattice_measure(s, 1, 2, 4);
        const double aw_dp = aot::aw1_value(mu, nu);
        const double aw_lp = aot::bicausal_lp_oracle(mu, nu, aot::sum_norm_cost);
        max_aw_gap = std::max(max_aw_gap, std::abs(aw_dp - aw_lp));
        const double av_dp = aot::av1(mu, nu);
        const double av_lp = aot::bicausal_lp_oracle(mu, nu, aot::indicator_weighted_cost);
        max_av_gap = std::max(max_av_gap, std::abs(av_dp - av_lp));
        max_tv_gap = std::max(max_tv_gap, std::abs(aot::tv1_closed_form(mu, nu) -
                                                   aot::tv1_coupling_form(mu, nu)));
        const aot::DominationReport rep = aot::domination_check(mu, nu);
        if (!rep.chain_holds() || aot::w1(mu, nu) > rep.aw1 + 1e-9) ++domination_violations;
        if ((k + 1) % 25 == 0) std::fprintf(stderr, "oracle-check: %d/%d\n", k + 1, count);
    }
    const bool pass = max_aw_gap <= 1e-7 && max_av_gap <= 1e-7 && max_tv_gap <= 1e-9 &&
                      domination_violations == 0;
    nlohmann::json j = {{"count", count},
                        {"max_aw1_gap", max_aw_gap},
                        {"max_av1_gap", max_av_gap},
                        {"max_tv1_gap", max_tv_gap},
                        {"domination_violations", domination_violations},
                        {"pass", pass}};
    if (as_json)
        std::printf("%s\n", j.dump().c_str());
    else
        std::printf("%s max_gap=%.3g\n", pass ? "PASS" : "FAIL", std::max(max_aw_gap, max_av_gap));
    return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adapted optimal transport distances, estimators, and experiments"};
    app.require_subcommand(1);

    // verify
    auto* verify = app.add_subcommand("verify", "check the exact example values");
    std::vector<double> eps_list = {0.1, 0.25, 0.5};
    bool verify_json = false, inject_error = false;
    verify->add_option("--eps", eps_list, "example parameter(s)")->expected(-1);
    verify->add_flag("--json", verify_json, "machine-readable verdict list on stdout");
    verify->add_flag("--inject-error", inject_error,
                     "negative control: perturb one expected constant");

    // dist
    auto* dist = app.add_subcommand("dist", "distance between two measure files");
    std::string file_a, file_b, metric = "aw1", coupling_out;
    bool dist_json = false;
    dist->add_option("file_a", file_a, "first measure json")->required();
    dist->add_option("file_b", file_b, "second measure json")->required();
    dist->add_option("--metric", metric, "w1 | tv | tv1 | av1 | aw1")->required();
    dist->add_option("--coupling", coupling_out, "write an optimal coupling json here");
    dist->add_flag("--json", dist_json, "json output");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "build an estimator from samples or a model");
    std::string spec_file, samples_file, model_file, est_out;
    std::uint64_t est_seed = 0;
    bool est_json = false;
    estimate->add_option("--spec", spec_file, "estimator spec json")->required();
    estimate->add_option("--samples", samples_file, "samples json ({d, T, samples})");
    estimate->add_option("--model", model_file, "mixture model json to sample from");
    estimate->add_option("--seed", est_seed, "random seed")->required();
    estimate->add_option("--out", est_out, "write the estimator measure json here");
    estimate->add_flag("--json", est_json, "json output");

    // converge
    auto* converge = app.add_subcommand("converge", "run a convergence-rate experiment");
    std::string config_file, converge_out;
    std::uint64_t conv_seed = 0;
    bool conv_json = false;
    converge->add_option("config", config_file, "experiment config json")->required();
    auto* conv_seed_opt = converge->add_option("--seed", conv_seed, "override the config seed");
    converge->add_option("--out", converge_out, "override the report output path");
    converge->add_flag("--json", conv_json, "json output");

    // oracle-check
    auto* oracle = app.add_subcommand("oracle-check", "cross-validate the DPs against the LP oracle");
    std::uint64_t oracle_seed = 0;
    int oracle_count = 100;
    bool oracle_json = false;
    oracle->add_option("--seed", oracle_seed, "random seed")->required();
    oracle->add_option("--count", oracle_count, "number of random instances")
        ->check(CLI::PositiveNumber);
    oracle->add_flag("--json", oracle_json, "json output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (verify->parsed()) return run_verify(eps_list, inject_error, verify_json);
        if (dist->parsed()) return run_dist(file_a, file_b, metric, coupling_out, dist_json);
        if (estimate->parsed()) {
            if (samples_file.empty() == model_file.empty())
                throw std::invalid_argument("estimate: pass exactly one of --samples / --model");
            return run_estimate(spec_file, samples_file, model_file, est_seed, est_out, est_json);
        }
        if (converge->parsed())
            return run_converge(config_file, conv_seed, conv_seed_opt->count() > 0, converge_out,
                                conv_json);
        if (oracle->parsed()) return run_oracle_check(oracle_seed, oracle_count, oracle_json);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
