// SPDX-License-Identifier: MIT
//
// Convergence-rate and deviation experiments. A run draws i.i.d. samples
// from a model, builds an estimator per (N, trial) cell on the resolved
// schedule, measures the adapted distance to a fixed high-resolution
// reference, and fits a log-log rate. Everything is a pure function of
// (config, seed): trial substreams are derived by hashing, aggregation is
// sequential, and number formatting is pinned, so reports are
// byte-reproducible.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "aot/adapted.hpp"
#include "aot/estimators.hpp"
#include "aot/gaussian.hpp"
#include "aot/numerics.hpp"
#include "aot/path_measure.hpp"
#include "aot/prefix_tree.hpp"
#include "aot/rng.hpp"

namespace aot {

using Model = std::variant<DiscretePathMeasure, GaussianMixture>;

inline int model_d(const Model& m) {
    return std::visit([](const auto& x) { return x.d(); }, m);
}
inline int model_T(const Model& m) {
    return std::visit([](const auto& x) { return x.T(); }, m);
}

/// i.i.d. path samples from either model kind.
inline std::vector<Path> model_sample(SeededSampler& s, const Model& model, std::size_t n) {
    if (const auto* g = std::get_if<GaussianMixture>(&model)) return mixture_sample(s, *g, n);
    const auto& m = std::get<DiscretePathMeasure>(model);
    std::vector<double> cum;
    cum.reserve(m.size());
    double acc = 0.0;
    for (const Atom& a : m.atoms()) {
        acc += a.weight;
        cum.push_back(acc);
    }
    std::vector<Path> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        std::size_t idx = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (idx >= m.size()) idx = m.size() - 1;
        out.push_back(m.atom(idx).path);
    }
    return out;
}

// ============================================================================
// Reference discretization
// ============================================================================

inline constexpr std::uint64_t kReferenceStream = 0x7265666572ull;   // "refer"
inline constexpr std::uint64_t kRefNoiseStream = 0x7265666e6full;    // "refno"

/// Discrete stand-in for the model at a given resolution. A discrete model
/// is returned as-is; a mixture is discretized noise-then-project style on
/// its own schedule (sigma = delta = resolution^{-1/(D(d) T)}), cached by
/// the caller and reused across all trials.
inline DiscretePathMeasure reference_measure(const Model& model, std::size_t resolution,
                                             std::uint64_t seed) {
    if (const auto* m = std::get_if<DiscretePathMeasure>(&model)) return *m;
    const auto& g = std::get<GaussianMixture>(model);
    if (resolution < 2) throw std::invalid_argument("reference_measure: resolution too small");
    const double r =
        1.0 / (static_cast<double>(dimension_rate_denominator(g.d())) * static_cast<double>(g.T()));
    const double sd = std::pow(static_cast<double>(resolution), -r);
    SeededSampler sample_rng(seed, kReferenceStream);
    const std::vector<Path> samples = mixture_sample(sample_rng, g, resolution);
    SeededSampler noise(seed, kRefNoiseStream);
    return build_as1_emp(samples, noise, sd, GridSpec(sd, g.dim()));
}

// ============================================================================
// Experiment configuration
// ============================================================================

struct ExperimentConfig {
    Model model;
    EstimatorSpec estimator;              // N is overridden per schedule entry
    std::vector<std::size_t> schedule;    // strictly increasing sample counts
    int trials = 1;
    std::uint64_t seed = 0;
    std::size_t reference_resolution = 65536;
    std::string csv_out;                  // empty: do not write
    std::string report_out;               // empty: do not write
    std::optional<std::pair<double, double>> slope_band;
    bool timing = false;                  // off by default: byte-stable output

    void validate() const {
        if (schedule.empty()) throw std::invalid_argument("config: empty schedule");
        for (std::size_t i = 1; i < schedule.size(); ++i)
            if (schedule[i] <= schedule[i - 1])
                throw std::invalid_argument("config: schedule must be strictly increasing");
        if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    }
};

struct TrialRow {
    std::string estimator;
    std::size_t N = 0;
    int trial = 0;
    std::uint64_t stream = 0;
    double distance = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    long long wall_ms = 0;
};

struct PerNStats {
    std::size_t N = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    std::vector<double> distances;
};

struct EnvelopeConstants {
    double C1 = 0.0;         // int exp(-|u|^2) du
    double C2 = 0.0;         // int |u|^p exp(-|u|^2) du
    double C_envelope = 0.0;
    double c1 = 0.0;
    double c_envelope = 0.0;
};

struct RateReport {
    std::vector<TrialRow> rows;
    std::vector<PerNStats> per_n;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double theoretical_slope = 0.0;
    int mean_inversions = 0;  // count of increases along the schedule
    std::vector<EnvelopeConstants> envelope_per_n;
    double envelope_p = 0.0;
    double envelope_Mp = 0.0;
    double envelope_K_bound = 0.0;
};

// ============================================================================
// Envelope constants
// ============================================================================

namespace detail {

/// int_{R^k} exp(-|u|^2) du by quadrature: direct in 1d, radial in 2d/3d,
/// coordinate product beyond.
inline double gaussian_integral(int k) {
    auto f1 = [](double t) { return std::exp(-t * t); };
    const double i1 = simpson(f1, -12.0, 12.0, 20000);
    if (k == 1) return i1;
    if (k == 2) {
        auto f = [](double r) { return 2.0 * kPi * r * std::exp(-r * r); };
        return simpson(f, 0.0, 14.0, 20000);
    }
    if (k == 3) {
        auto f = [](double r) { return 4.0 * kPi * r * r * std::exp(-r * r); };
        return simpson(f, 0.0, 14.0, 20000);
    }
    return std::pow(i1, k);
}

/// int_{R^k} |u|_2^p exp(-|u|^2) du via the radial representation.
inline double gaussian_norm_moment_integral(int k, double p) {
    double surface;  // of the unit sphere S^{k-1}
    if (k == 1)
        surface = 2.0;
    else if (k == 2)
        surface = 2.0 * kPi;
    else if (k == 3)
        surface = 4.0 * kPi;
    else
        surface = 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k);
    auto f = [&](double r) { return std::pow(r, p + k - 1) * std::exp(-r * r); };
    return surface * simpson(f, 0.0, 14.0, 20000);
}

}  // namespace detail

/// Report-only constants of the mean-rate and deviation bounds: the mean
/// envelope sqrt((C1 (2^p Mp + 1) + C2 2^p sigma^p) / (2 pi sigma)^{dT})
/// — note the sigma^{-dT/2} blow-up as the bandwidth shrinks — and the
/// bounded-difference constant c1 ((1 + 2 K_bound)/(2 sigma) + 1) with
/// c1 = sigma^{dT} E[|u_1| (1 + |u|_1)]. Never asserted against
/// empirical distances.
inline EnvelopeConstants theoretical_envelope(double sigma, double p, double Mp, double K_bound,
                                              int dT) {
    if (!(sigma > 0.0)) throw std::invalid_argument("theoretical_envelope: sigma must be > 0");
    if (!(p > 2.0)) throw std::invalid_argument("theoretical_envelope: p must be > 2");
    EnvelopeConstants e;
    e.C1 = detail::gaussian_integral(dT);
    e.C2 = detail::gaussian_norm_moment_integral(dT, p);
    const double bracket = e.C1 * (std::pow(2.0, p) * Mp + 1.0) + e.C2 * std::pow(2.0, p) * std::pow(sigma, p);
    e.C_envelope = std::sqrt(bracket / std::pow(2.0 * kPi * sigma, dT));

    // E[|u_1| (1 + sum_j |u_j|)] for a standard normal vector, assembled
    // from one-dimensional quadratures
    auto phi_abs_moment = [](double q) {
        auto f = [q](double t) { return std::pow(std::abs(t), q) * normal_pdf(t); };
        return simpson(f, -12.0, 12.0, 20000);
    };
    const double e_abs = phi_abs_moment(1.0);
    const double e_sq = phi_abs_moment(2.0);
    e.c1 = std::pow(sigma, dT) * (e_abs + e_sq + (dT - 1) * e_abs * e_abs);
    e.c_envelope = e.c1 * ((1.0 + 2.0 * K_bound) / (2.0 * sigma) + 1.0);
    return e;
}

// ============================================================================
// Convergence runner
// ============================================================================

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_rows_csv(const std::string& path, const std::vector<TrialRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open csv output: " + path);
    out << "estimator,N,trial,seed,distance,sigma,delta,wall_ms\n";
    for (const TrialRow& r : rows) {
        out << r.estimator << ',' << r.N << ',' << r.trial << ',' << r.stream << ','
            << format_double(r.distance) << ',' << format_double(r.sigma) << ','
            << format_double(r.delta) << ',' << r.wall_ms << '\n';
    }
}

}  // namespace detail

inline nlohmann::json rate_report_to_json(const RateReport& rep) {
    nlohmann::json j;
    j["slope"] = rep.slope;
    j["intercept"] = rep.intercept;
    j["r2"] = rep.r2;
    j["theoretical_slope"] = rep.theoretical_slope;
    j["mean_inversions"] = rep.mean_inversions;
    nlohmann::json per_n = nlohmann::json::array();
    for (const PerNStats& s : rep.per_n) {
        per_n.push_back({{"N", s.N},
                         {"mean", s.mean},
                         {"stderr", s.stderr_mean},
                         {"sigma", s.sigma},
                         {"delta", s.delta}});
    }
    j["per_N"] = std::move(per_n);
    nlohmann::json env = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.envelope_per_n.size(); ++i) {
        const EnvelopeConstants& e = rep.envelope_per_n[i];
        env.push_back({{"N", rep.per_n[i].N},
                       {"C1", e.C1},
                       {"C2", e.C2},
                       {"C_envelope", e.C_envelope},
                       {"c1", e.c1},
                       {"c_envelope", e.c_envelope}});
    }
    j["envelope"] = {{"p", rep.envelope_p},
                     {"Mp", rep.envelope_Mp},
                     {"K_bound", rep.envelope_K_bound},
                     {"per_N", std::move(env)}};
    return j;
}

inline RateReport run_convergence(const ExperimentConfig& cfg) {
    cfg.validate();
    const int d = model_d(cfg.model), T = model_T(cfg.model);

    const DiscretePathMeasure reference =
        reference_measure(cfg.model, cfg.reference_resolution, cfg.seed);
    const PrefixTree ref_tree = disintegrate(reference);

    RateReport rep;
    const std::uint64_t kind_id = static_cast<std::uint64_t>(cfg.estimator.kind);
    for (std::size_t n_idx = 0; n_idx < cfg.schedule.size(); ++n_idx) {
        const std::size_t N = cfg.schedule[n_idx];
        EstimatorSpec spec = cfg.estimator;
        spec.N = N;
        const ResolvedSchedule sched = resolve_schedule(spec, d, T);

        PerNStats stats;
        stats.N = N;
        stats.sigma = sched.sigma;
        stats.delta = sched.delta;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::uint64_t stream =
                stream_hash(static_cast<std::uint64_t>(trial), kind_id, N);
            double dist;
            try {
                SeededSampler sample_rng(cfg.seed, stream);
                const std::vector<Path> samples = model_sample(sample_rng, cfg.model, N);
                SeededSampler noise(cfg.seed, stream_hash(stream, 0x6e6f697365ull));
                const DiscretePathMeasure est = build_estimator(spec, samples, noise);
                dist = aw1_value(ref_tree, disintegrate(est));
            } catch (const std::exception& e) {
                throw std::runtime_error("trial N=" + std::to_string(N) + " trial=" +
                                         std::to_string(trial) + ": " + e.what());
            }

            TrialRow row;
            row.estimator = kind_name(spec.kind);
            row.N = N;
            row.trial = trial;
            row.stream = stream;
            row.distance = dist;
            row.sigma = sched.sigma;
            row.delta = sched.delta;
            if (cfg.timing) {
                row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            }
            rep.rows.push_back(row);
            stats.distances.push_back(dist);
        }
        double mean = 0.0;
        for (double v : stats.distances) mean += v;
        mean /= static_cast<double>(stats.distances.size());
        double var = 0.0;
        for (double v : stats.distances) var += (v - mean) * (v - mean);
        stats.mean = mean;
        stats.stderr_mean = stats.distances.size() > 1
                                ? std::sqrt(var / (static_cast<double>(stats.distances.size()) - 1.0) /
                                            static_cast<double>(stats.distances.size()))
                                : 0.0;
        rep.per_n.push_back(std::move(stats));
    }

    std::vector<double> log_n, log_mean;
    for (const PerNStats& s : rep.per_n) {
        log_n.push_back(std::log(static_cast<double>(s.N)));
        log_mean.push_back(std::log(std::max(s.mean, 1e-300)));
    }
    if (rep.per_n.size() >= 2) {
        const LineFit fit = fit_line(log_n, log_mean);
        rep.slope = fit.slope;
        rep.intercept = fit.intercept;
        rep.r2 = fit.r2;
    }
    rep.theoretical_slope = -cfg.estimator.rate_exponent(d, T);
    for (std::size_t i = 1; i < rep.per_n.size(); ++i)
        if (rep.per_n[i].mean > rep.per_n[i - 1].mean) ++rep.mean_inversions;

    // report-only rate constants, evaluated on the reference
    rep.envelope_p = 3.0;
    rep.envelope_Mp = moment(reference, rep.envelope_p);
    rep.envelope_K_bound = 0.0;
    for (const Atom& a : reference.atoms())
        rep.envelope_K_bound = std::max(rep.envelope_K_bound, sum_norm(a.path));
    for (const PerNStats& s : rep.per_n) {
        const double sig = s.sigma > 0.0 ? s.sigma : 1.0;
        rep.envelope_per_n.push_back(
            theoretical_envelope(sig, rep.envelope_p, rep.envelope_Mp, rep.envelope_K_bound, d * T));
    }

    if (!cfg.csv_out.empty()) detail::write_rows_csv(cfg.csv_out, rep.rows);
    if (!cfg.report_out.empty()) {
        std::ofstream out(cfg.report_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open report output: " + cfg.report_out);
        out << rate_report_to_json(rep).dump(2) << '\n';
    }
    return rep;
}

// ============================================================================
// Deviation profile
// ============================================================================

struct DeviationTable {
    std::vector<double> thresholds;
    std::vector<PerNStats> per_n;
    // tail[i][j] = fraction of trials at per_n[i] with distance >= mean_i + x_j
    std::vector<std::vector<double>> tail;
    // diagnostic: tail at threshold j non-increasing along the N schedule,
    // with one trial of slack for the binomial noise
    std::vector<bool> tail_non_increasing;
};

inline DeviationTable deviation_profile(const ExperimentConfig& cfg,
                                        const std::vector<double>& thresholds) {
    if (cfg.trials < 50)
        throw std::invalid_argument("deviation_profile: need >= 50 trials for tail estimates");
    const RateReport rep = run_convergence(cfg);
    DeviationTable table;
    table.thresholds = thresholds;
    table.per_n = rep.per_n;
    for (const PerNStats& s : rep.per_n) {
        std::vector<double> row;
        for (double x : thresholds) {
            int count = 0;
            for (double v : s.distances)
                if (v >= x + s.mean) ++count;
            row.push_back(static_cast<double>(count) / static_cast<double>(s.distances.size()));
        }
        table.tail.push_back(std::move(row));
    }
    const double slack = 1.0 / static_cast<double>(cfg.trials);
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        bool ok = true;
        for (std::size_t i = 1; i < table.tail.size(); ++i)
            ok = ok && table.tail[i][j] <= table.tail[i - 1][j] + slack;
        table.tail_non_increasing.push_back(ok);
    }
    return table;
}

// ============================================================================
// Bandwidth sweep
// ============================================================================

struct BandwidthRow {
    double sigma = 0.0;
    double distance = 0.0;
};

struct BandwidthSweep {
    std::vector<BandwidthRow> rows;
    double slope = 0.0;       // log distance vs log sigma over positive sigmas
    bool monotone = true;     // distance non-increasing as sigma decreases
};

/// Discretized bandwidth effect: distance between the reference and a
/// finely-projected surrogate of (reference * N_sigma). The resampling
/// index stream and the unit noise stream are fixed across sigmas, so the
/// sweep is smooth in sigma and byte-reproducible.
inline BandwidthSweep bandwidth_sweep(const Model& model, const std::vector<double>& sigmas,
                                      std::size_t resolution, std::uint64_t seed,
                                      std::size_t surrogate_draws = 32768) {
    for (std::size_t i = 1; i < sigmas.size(); ++i)
        if (!(sigmas[i] < sigmas[i - 1]))
            throw std::invalid_argument("bandwidth_sweep: sigmas must be strictly decreasing");

    const DiscretePathMeasure ref = reference_measure(model, resolution, seed);
    const PrefixTree ref_tree = disintegrate(ref);
    const int dim = ref.d() * ref.T();

    // base draws shared across all sigmas
    std::vector<double> cum;
    double acc = 0.0;
    for (const Atom& a : ref.atoms()) {
        acc += a.weight;
        cum.push_back(acc);
    }
    SeededSampler idx_rng(seed, 0x62772d696478ull);
    SeededSampler eps_rng(seed, 0x62772d657073ull);
    std::vector<std::size_t> base_idx(surrogate_draws);
    std::vector<double> unit_noise(surrogate_draws * static_cast<std::size_t>(dim));
    for (std::size_t k = 0; k < surrogate_draws; ++k) {
        const double u = idx_rng.next_uniform();
        std::size_t idx = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        if (idx >= ref.size()) idx = ref.size() - 1;
        base_idx[k] = idx;
    }
    for (double& e : unit_noise) e = eps_rng.next_normal();

    BandwidthSweep sweep;
    for (double sigma : sigmas) {
        BandwidthRow row;
        row.sigma = sigma;
        if (sigma == 0.0) {
            row.distance = 0.0;
        } else {
            const GridSpec fine(sigma / 4.0, dim);
            std::vector<Atom> atoms;
            atoms.reserve(surrogate_draws);
            const double w = 1.0 / static_cast<double>(surrogate_draws);
            for (std::size_t k = 0; k < surrogate_draws; ++k) {
                std::vector<double> c = ref.atom(base_idx[k]).path.coords;
                for (int i = 0; i < dim; ++i)
                    c[static_cast<std::size_t>(i)] +=
                        sigma * unit_noise[k * static_cast<std::size_t>(dim) +
                                           static_cast<std::size_t>(i)];
                atoms.push_back({project_path(fine, Path(ref.d(), ref.T(), std::move(c))), w});
            }
            const DiscretePathMeasure surrogate =
                DiscretePathMeasure::from_atoms(ref.d(), ref.T(), std::move(atoms));
            row.distance = aw1_value(ref_tree, disintegrate(surrogate));
        }
        sweep.rows.push_back(row);
    }

    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
        if (sweep.rows[i].distance > sweep.rows[i - 1].distance + 1e-12) sweep.monotone = false;

    std::vector<double> ls, ld;
    for (const BandwidthRow& r : sweep.rows) {
        if (r.sigma > 0.0 && r.distance > 0.0) {
            ls.push_back(std::log(r.sigma));
            ld.push_back(std::log(r.distance));
        }
    }
    if (ls.size() >= 2) sweep.slope = fit_line(ls, ld).slope;
    return sweep;
}

// ============================================================================
// Config JSON
// ============================================================================

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const auto& jm = j.at("model");
    const std::string type = jm.at("type").get<std::string>();
    if (type == "mixture")
        cfg.model = mixture_from_json(jm.at("value"));
    else if (type == "measure")
        cfg.model = measure_from_json(jm.at("value"));
    else
        throw std::invalid_argument("config: model type must be 'mixture' or 'measure'");
    cfg.estimator = estimator_spec_from_json(j.at("estimator"));
    cfg.schedule = j.at("schedule").get<std::vector<std::size_t>>();
    cfg.trials = j.at("trials").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.reference_resolution = j.value("reference_resolution", std::size_t{65536});
    cfg.csv_out = j.value("csv_out", std::string{});
    cfg.report_out = j.value("report_out", std::string{});
    if (j.contains("slope_band")) {
        const auto band = j.at("slope_band").get<std::vector<double>>();
        if (band.size() != 2 || !(band[0] <= band[1]))
            throw std::invalid_argument("config: slope_band must be [lo, hi]");
        cfg.slope_band = {band[0], band[1]};
    }
    cfg.timing = j.value("timing", false);
    cfg.validate();
    return cfg;
}

inline nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (const auto* g = std::get_if<GaussianMixture>(&cfg.model))
        j["model"] = {{"type", "mixture"}, {"value", mixture_to_json(*g)}};
    else
        j["model"] = {{"type", "measure"},
                      {"value", measure_to_json(std::get<DiscretePathMeasure>(cfg.model))}};
    j["estimator"] = estimator_spec_to_json(cfg.estimator);
    j["schedule"] = cfg.schedule;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["reference_resolution"] = cfg.reference_resolution;
    if (!cfg.csv_out.empty()) j["csv_out"] = cfg.csv_out;
    if (!cfg.report_out.empty()) j["report_out"] = cfg.report_out;
    if (cfg.slope_band) j["slope_band"] = {cfg.slope_band->first, cfg.slope_band->second};
    if (cfg.timing) j["timing"] = true;
    return j;
}

}  // namespace aot
