// SPDX-License-Identifier: MIT
//
// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances and thresholds are pinned in this file.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aot/adapted.hpp"
#include "aot/estimators.hpp"
#include "aot/examples.hpp"
#include "aot/experiments.hpp"
#include "aot/gaussian.hpp"
#include "aot/random_instances.hpp"

using namespace aot;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(const std::string& name, bool pass, double seconds, const std::string& detail = "") {
    std::printf("[%s] %-34s (%6.2f s)%s%s\n", pass ? "PASS" : "FAIL", name.c_str(), seconds,
                detail.empty() ? "" : "  ", detail.c_str());
    if (!pass) ++g_failures;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GaussianMixture acceptance_mixture() {
    return GaussianMixture(1, 2, {{0.5, {-1.0, -1.0}, 0.4}, {0.5, {1.0, 1.0}, 0.4}});
}

constexpr std::uint64_t kSeed = 20260810;
constexpr std::size_t kReferenceResolution = 262144;

// --------------------------------------------------------------------------
// criterion 1: exact example values at 1e-9, each sub-check under a second
// --------------------------------------------------------------------------
void criterion_1() {
    Timer t;
    bool pass = true;
    std::string detail;

    for (double eps : {0.1, 0.5}) {
        Timer sub;
        auto p = examples::conditional_gap_pair(eps);
        pass &= close(w1(p.mu, p.nu), eps, 1e-9);
        pass &= close(aw1_value(p.mu, p.nu), 1.0 + eps, 1e-9);
        pass &= sub.seconds() < 1.0;
    }

    for (double eps : {0.1, 0.2}) {
        Timer sub;
        auto p = examples::tail_blowup_pair(eps);
        pass &= close(tv1_closed_form(p.mu, p.nu), 2.0 * eps * eps, 1e-9);
        const double stated = 2.0 + eps - eps * eps;
        const double computed = av1(p.mu, p.nu);
        if (!close(computed, stated, 1e-9)) {
            pass = false;
            const double lp = bicausal_lp_oracle(p.mu, p.nu, indicator_weighted_cost);
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "av1(eps=%.1f): stated %.9g, computed %.9g, bicausal LP %.9g; ", eps,
                          stated, computed, lp);
            detail += buf;
        }
        pass &= sub.seconds() < 1.0;
    }

    {
        Timer sub;
        const double eps = 0.25;
        auto f = examples::nonconvexity_family(eps);
        pass &= close(aw1_value(f.mu, f.nu1), 0.0, 1e-9);
        pass &= close(aw1_value(f.mu, f.nu2), 0.5, 1e-9);
        pass &= close(aw1_value(f.mu, f.mix), 1.0, 1e-9);
        const double avg = 0.5 * (aw1_value(f.mu, f.nu1) + aw1_value(f.mu, f.nu2));
        pass &= aw1_value(f.mu, f.mix) > avg + 1e-9;  // violated, as stated
        pass &= sub.seconds() < 1.0;
    }

    report("criterion 1: exact examples", pass, t.seconds(), detail);
}

// --------------------------------------------------------------------------
// criterion 2: DP vs bi-causal LP oracle on 100 seeded instances, < 60 s
// --------------------------------------------------------------------------
void criterion_2() {
    Timer t;
    SeededSampler s(kSeed, 2);
    double max_aw = 0.0, max_av = 0.0;
    for (int k = 0; k < 100; ++k) {
        auto mu = random_lattice_measure(s, 1, 2, 4);
        auto nu = random_lattice_measure(s, 1, 2, 4);
        max_aw = std::max(max_aw,
                          std::abs(aw1_value(mu, nu) - bicausal_lp_oracle(mu, nu, sum_norm_cost)));
        max_av = std::max(
            max_av, std::abs(av1(mu, nu) - bicausal_lp_oracle(mu, nu, indicator_weighted_cost)));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |aw1 gap| %.3g, max |av1 gap| %.3g", max_aw, max_av);
    report("criterion 2: oracle equivalence", max_aw <= 1e-7 && max_av <= 1e-7 && t.seconds() < 60.0,
           t.seconds(), buf);
}

// --------------------------------------------------------------------------
// criterion 3: inequality sweeps on 200 seeded pairs, zero violations
// --------------------------------------------------------------------------
void criterion_3() {
    Timer t;
    SeededSampler s(kSeed, 3);
    int violations = 0;
    for (int k = 0; k < 200; ++k) {
        const int T = (k % 4 == 0) ? 3 : 2;
        auto mu = random_lattice_measure(s, 1, T, 3);
        auto nu = random_lattice_measure(s, 1, T, 3);

        const DominationReport rep = domination_check(mu, nu);
        if (w1(mu, nu) > rep.aw1 + 1e-9) ++violations;
        if (!rep.aw_le_av) ++violations;
        if (!rep.av_le_const_tv) ++violations;
        if (!close(rep.tv1, tv1_coupling_form(mu, nu), 1e-9)) ++violations;

        // one-step contraction of the adapted weighted TV along marginals
        for (int tt = 1; tt <= T - 1; ++tt) {
            const double next = av1(marginal_up_to(mu, tt + 1), marginal_up_to(nu, tt + 1));
            const double cur = av1(marginal_up_to(mu, tt), marginal_up_to(nu, tt));
            if (next > (2.0 + 4.0 * rep.alpha) * cur + rep.tv1 + 1e-9) ++violations;
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "violations %d / 200 pairs", violations);
    report("criterion 3: inequality sweeps", violations == 0, t.seconds(), buf);
}

// --------------------------------------------------------------------------
// criterion 4: convexity on 50 shifted disjoint-grid mixtures
// --------------------------------------------------------------------------
void criterion_4() {
    Timer t;
    SeededSampler s(kSeed, 4);
    int violations = 0;
    for (int k = 0; k < 50; ++k) {
        GridSpec g(0.25, 2);
        auto mu = random_lattice_measure(s, 1, 2, 3);
        const int M = 2 + static_cast<int>(s.next_u64() % 3);
        auto zetas = zeta_default(M, g);
        std::vector<DiscretePathMeasure> parts;
        for (int m = 0; m < M; ++m)
            parts.push_back(
                shift(adapted_project(g, random_lattice_measure(s, 1, 2, 3)), zetas[m]));
        const ConvexityCheck c = mixture_convexity_check(mu, parts);
        if (!c.disjoint || c.lhs > c.rhs + 1e-9) ++violations;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "violations %d / 50 mixtures", violations);
    report("criterion 4: mixture convexity", violations == 0, t.seconds(), buf);
}

// --------------------------------------------------------------------------
// criterion 5: adapted-estimator rate exponents
// --------------------------------------------------------------------------
void criterion_5() {
    Timer t;
    bool pass = true;
    std::string detail;
    for (int M : {1, 4}) {
        ExperimentConfig cfg;
        cfg.model = acceptance_mixture();
        cfg.estimator.kind = M == 1 ? EstimatorKind::AS1Emp : EstimatorKind::ASEmp;
        cfg.estimator.M = M;
        cfg.schedule = {64, 128, 256, 512, 1024, 2048, 4096, 8192};
        cfg.trials = 20;
        cfg.seed = kSeed;
        cfg.reference_resolution = kReferenceResolution;
        const RateReport rep = run_convergence(cfg);
        const bool slope_ok = rep.slope >= -0.6 && rep.slope <= -0.1;
        const bool monotone_ok = rep.mean_inversions <= 1;
        pass &= slope_ok && monotone_ok;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%s slope %.3f inversions %d; ",
                      kind_name(cfg.estimator.kind), rep.slope, rep.mean_inversions);
        detail += buf;
    }
    pass &= t.seconds() < 600.0;
    report("criterion 5: adapted rate exponents", pass, t.seconds(), detail);
}

// --------------------------------------------------------------------------
// criterion 6: smoothed-estimator schedule and surrogate stability
// --------------------------------------------------------------------------
void criterion_6() {
    Timer t;
    ExperimentConfig cfg;
    cfg.model = acceptance_mixture();
    cfg.estimator.kind = EstimatorKind::SEmp;
    cfg.estimator.delta_rule = {BandwidthRule::Type::SigmaFraction, 0.25};
    cfg.estimator.surrogate_K = 0;  // 16 N
    cfg.schedule = {64, 128, 256, 512, 1024, 2048, 4096, 8192};
    cfg.trials = 20;
    cfg.seed = kSeed;
    cfg.reference_resolution = kReferenceResolution;
    const RateReport rep = run_convergence(cfg);
    const bool slope_ok = rep.slope >= -0.6 && rep.slope <= -0.05;

    // surrogate doubling stability on one seeded cell: K = 16N vs 32N
    const DiscretePathMeasure reference =
        reference_measure(cfg.model, cfg.reference_resolution, cfg.seed);
    const PrefixTree ref_tree = disintegrate(reference);
    const std::size_t N = 1024;
    SeededSampler sample_rng(kSeed, 61);
    const std::vector<Path> samples =
        model_sample(sample_rng, cfg.model, N);
    SeededSampler noise(kSeed, 62);
    const double sigma = std::pow(static_cast<double>(N), -0.25);
    const GridSpec fine(sigma / 4.0, 2);
    const double d16 =
        aw1_value(ref_tree, disintegrate(build_s_emp_surrogate(samples, noise, sigma, fine, 16 * N)));
    const double d32 =
        aw1_value(ref_tree, disintegrate(build_s_emp_surrogate(samples, noise, sigma, fine, 32 * N)));
    const double rel = std::abs(d16 - d32) / d16;
    const bool stable = rel < 0.05;

    char buf[96];
    std::snprintf(buf, sizeof(buf), "slope %.3f, doubling change %.2f%%", rep.slope, 100.0 * rel);
    report("criterion 6: smoothed schedule", slope_ok && stable, t.seconds(), buf);
}

// --------------------------------------------------------------------------
// criterion 7: bandwidth sweep slope
// --------------------------------------------------------------------------
void criterion_7() {
    Timer t;
    const BandwidthSweep sweep =
        bandwidth_sweep(Model{acceptance_mixture()}, {0.4, 0.2, 0.1, 0.05}, kReferenceResolution,
                        kSeed, 131072);
    const bool pass = sweep.slope >= 0.5 && sweep.slope <= 1.5;
    char buf[128];
    std::string dists;
    for (const BandwidthRow& r : sweep.rows) {
        std::snprintf(buf, sizeof(buf), "%.4f ", r.distance);
        dists += buf;
    }
    std::snprintf(buf, sizeof(buf), "slope %.3f, distances %s", sweep.slope, dists.c_str());
    report("criterion 7: bandwidth sweep", pass, t.seconds(), buf);
}

// --------------------------------------------------------------------------
// criterion 8: byte-identical outputs under a fixed seed
// --------------------------------------------------------------------------
void criterion_8() {
    Timer t;
    ExperimentConfig cfg;
    cfg.model = acceptance_mixture();
    cfg.estimator.kind = EstimatorKind::ASEmp;
    cfg.estimator.M = 4;
    cfg.schedule = {64, 128, 256};
    cfg.trials = 5;
    cfg.seed = kSeed;
    cfg.reference_resolution = 16384;
    cfg.csv_out = "/tmp/aot_acc_run1.csv";
    cfg.report_out = "/tmp/aot_acc_rep1.json";
    run_convergence(cfg);
    cfg.csv_out = "/tmp/aot_acc_run2.csv";
    cfg.report_out = "/tmp/aot_acc_rep2.json";
    run_convergence(cfg);
    const bool pass = slurp("/tmp/aot_acc_run1.csv") == slurp("/tmp/aot_acc_run2.csv") &&
                      slurp("/tmp/aot_acc_rep1.json") == slurp("/tmp/aot_acc_rep2.json") &&
                      !slurp("/tmp/aot_acc_run1.csv").empty();
    for (const char* f : {"/tmp/aot_acc_run1.csv", "/tmp/aot_acc_run2.csv",
                          "/tmp/aot_acc_rep1.json", "/tmp/aot_acc_rep2.json"})
        std::remove(f);
    report("criterion 8: determinism", pass, t.seconds());
}

// --------------------------------------------------------------------------
// criterion 9: Gaussian-integral self-check of the envelope constants
// --------------------------------------------------------------------------
void criterion_9() {
    Timer t;
    bool pass = true;
    for (int k : {1, 2, 3})
        pass &= close(detail::gaussian_integral(k), std::pow(kPi, 0.5 * k), 1e-8);
    report("criterion 9: envelope self-check", pass, t.seconds());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
