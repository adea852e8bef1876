// SPDX-License-Identifier: MIT
//
// The five empirical-measure estimators built from i.i.d. path samples:
//
//   emp      plain empirical measure (fails to converge in adapted distance)
//   s_emp    smoothed empirical measure, evaluated through a discrete
//            surrogate (fresh draws from the convolution, finely projected)
//   a_emp    adapted projection of the empirical measure
//   as1_emp  noise-then-project (single noising)
//   as_emp   M independent noisings, each projected and translated by a
//            distinct small shift so the parts live on disjoint grids
//
// Construction is pure given (samples, sampler): part m of as_emp always
// draws from the substream derived for m, so identical inputs reproduce
// identical estimators and parts can be rebuilt in isolation.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "aot/grid.hpp"
#include "aot/path_measure.hpp"
#include "aot/rng.hpp"

namespace aot {

// ============================================================================
// Core builders
// ============================================================================

inline DiscretePathMeasure build_emp(const std::vector<Path>& samples) {
    if (samples.empty()) throw std::invalid_argument("build_emp: no samples");
    const double w = 1.0 / static_cast<double>(samples.size());
    std::vector<Atom> atoms;
    atoms.reserve(samples.size());
    for (const Path& p : samples) atoms.push_back({p, w});
    return DiscretePathMeasure::from_atoms(samples[0].d, samples[0].T, std::move(atoms));
}

inline DiscretePathMeasure build_a_emp(const std::vector<Path>& samples, const GridSpec& g) {
    return adapted_project(g, build_emp(samples));
}

namespace detail {

inline constexpr std::uint64_t kNoisePartTag = 0x61735f656d70ull;  // "as_emp"

inline SeededSampler part_noise(const SeededSampler& noise, int m) {
    return noise.with_stream(stream_hash(noise.stream(), kNoisePartTag,
                                         static_cast<std::uint64_t>(m)));
}

/// One noising of the sample set, projected onto the grid.
inline DiscretePathMeasure noised_projected_part(const std::vector<Path>& samples,
                                                 const SeededSampler& noise, int m, double sigma,
                                                 const GridSpec& g) {
    if (samples.empty()) throw std::invalid_argument("estimator: no samples");
    const int d = samples[0].d, T = samples[0].T;
    if (g.dimension != d * T) throw std::invalid_argument("estimator: grid dimension mismatch");
    SeededSampler eps = part_noise(noise, m);
    const double w = 1.0 / static_cast<double>(samples.size());
    std::vector<Atom> atoms;
    atoms.reserve(samples.size());
    for (const Path& p : samples) {
        std::vector<double> c = p.coords;
        for (double& x : c) x += sigma * eps.next_normal();
        atoms.push_back({project_path(g, Path(d, T, std::move(c))), w});
    }
    return DiscretePathMeasure::from_atoms(d, T, std::move(atoms));
}

}  // namespace detail

inline DiscretePathMeasure build_as1_emp(const std::vector<Path>& samples,
                                         const SeededSampler& noise, double sigma,
                                         const GridSpec& g) {
    if (!(sigma > 0.0)) throw std::invalid_argument("build_as1_emp: sigma must be > 0");
    return detail::noised_projected_part(samples, noise, 0, sigma, g);
}

/// The default shift scheme: zeta_m = (m/(M+1)) * (1/(2G)) * (1,...,1),
/// pairwise distinct and strictly inside the open box (0, 1/(2G))^{dT}.
inline std::vector<std::vector<double>> zeta_default(int M, const GridSpec& g) {
    if (M < 1) throw std::invalid_argument("zeta_default: M must be >= 1");
    std::vector<std::vector<double>> zetas;
    const double box = 0.5 * g.cell_width();
    for (int m = 1; m <= M; ++m) {
        zetas.emplace_back(static_cast<std::size_t>(g.dimension),
                           box * static_cast<double>(m) / static_cast<double>(M + 1));
    }
    return zetas;
}

/// The unshifted parts of as_emp: part m noised from substream m, projected.
inline std::vector<DiscretePathMeasure> build_as_emp_parts(const std::vector<Path>& samples,
                                                           const SeededSampler& noise,
                                                           double sigma, const GridSpec& g,
                                                           int M) {
    if (!(sigma > 0.0)) throw std::invalid_argument("build_as_emp: sigma must be > 0");
    if (M < 1) throw std::invalid_argument("build_as_emp: M must be >= 1");
    std::vector<DiscretePathMeasure> parts;
    parts.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
        parts.push_back(detail::noised_projected_part(samples, noise, m, sigma, g));
    return parts;
}

inline DiscretePathMeasure build_as_emp(const std::vector<Path>& samples,
                                        const SeededSampler& noise, double sigma,
                                        const GridSpec& g, int M,
                                        const std::vector<std::vector<double>>& zetas) {
    if (static_cast<int>(zetas.size()) != M)
        throw std::invalid_argument("build_as_emp: need one zeta per part");
    const double box = 0.5 * g.cell_width();
    for (std::size_t a = 0; a < zetas.size(); ++a) {
        if (zetas[a].size() != static_cast<std::size_t>(g.dimension))
            throw std::invalid_argument("build_as_emp: zeta dimension mismatch");
        for (double z : zetas[a])
            if (!(z >= 0.0) || !(z < box))
                throw std::invalid_argument("build_as_emp: zeta outside [0, 1/(2G))");
        for (std::size_t b = a + 1; b < zetas.size(); ++b)
            if (zetas[a] == zetas[b]) throw std::invalid_argument("build_as_emp: duplicate zeta");
    }
    const std::vector<DiscretePathMeasure> parts = build_as_emp_parts(samples, noise, sigma, g, M);
    std::vector<Atom> atoms;
    const double scale = 1.0 / static_cast<double>(M);
    for (int m = 0; m < M; ++m) {
        for (const Atom& a : parts[static_cast<std::size_t>(m)].atoms()) {
            std::vector<double> c = a.path.coords;
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += zetas[static_cast<std::size_t>(m)][i];
            atoms.push_back({Path(a.path.d, a.path.T, std::move(c)), a.weight * scale});
        }
    }
    return DiscretePathMeasure::from_atoms(samples[0].d, samples[0].T, std::move(atoms));
}

/// Discrete surrogate for the smoothed empirical measure: K fresh draws
/// from emp * N(0, sigma^2 I), finely projected so adapted distances
/// against it are computable. Resampling is round-robin over the original
/// sample list, so each sample is noised exactly K/N times when N | K and
/// the sigma -> 0 limit recovers the adapted empirical measure exactly.
inline DiscretePathMeasure build_s_emp_surrogate(const std::vector<Path>& samples,
                                                 const SeededSampler& noise, double sigma,
                                                 const GridSpec& fine_g, std::size_t K) {
    if (samples.empty()) throw std::invalid_argument("surrogate: no samples");
    if (K < samples.size()) throw std::invalid_argument("surrogate: K must be >= N");
    if (!(sigma > 0.0)) throw std::invalid_argument("surrogate: sigma must be > 0");
    const int d = samples[0].d, T = samples[0].T;
    if (fine_g.dimension != d * T) throw std::invalid_argument("surrogate: grid dimension mismatch");
    SeededSampler eps = detail::part_noise(noise, 0);
    const double w = 1.0 / static_cast<double>(K);
    std::vector<Atom> atoms;
    atoms.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Path& base = samples[k % samples.size()];
        std::vector<double> c = base.coords;
        for (double& x : c) x += sigma * eps.next_normal();
        atoms.push_back({project_path(fine_g, Path(d, T, std::move(c))), w});
    }
    return DiscretePathMeasure::from_atoms(d, T, std::move(atoms));
}

// ============================================================================
// Estimator specifications
// ============================================================================

enum class EstimatorKind { Emp, SEmp, AEmp, AS1Emp, ASEmp };

inline const char* kind_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Emp: return "emp";
        case EstimatorKind::SEmp: return "s_emp";
        case EstimatorKind::AEmp: return "a_emp";
        case EstimatorKind::AS1Emp: return "as1_emp";
        case EstimatorKind::ASEmp: return "as_emp";
    }
    return "?";
}

inline EstimatorKind kind_from_name(const std::string& s) {
    if (s == "emp") return EstimatorKind::Emp;
    if (s == "s_emp") return EstimatorKind::SEmp;
    if (s == "a_emp") return EstimatorKind::AEmp;
    if (s == "as1_emp") return EstimatorKind::AS1Emp;
    if (s == "as_emp") return EstimatorKind::ASEmp;
    throw std::invalid_argument("unknown estimator kind: " + s);
}

/// Rate denominator D(d): d for d >= 3, d + 1 for d = 1, 2.
inline int dimension_rate_denominator(int d) { return d >= 3 ? d : d + 1; }

struct BandwidthRule {
    enum class Type { Rate, Fixed, SigmaFraction };
    Type type = Type::Rate;
    double value = 0.0;
};

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::ASEmp;
    std::size_t N = 0;
    int M = 1;                         // as_emp only; 1 elsewhere
    BandwidthRule sigma_rule;          // Rate: sigma_N = N^{-r}
    BandwidthRule delta_rule;          // Rate: delta_N = N^{-r}; SigmaFraction for s_emp
    std::string zeta_scheme = "diagonal";
    std::size_t surrogate_K = 0;       // s_emp: 0 means 16 N

    /// Canonical exponent: 1/(dT+2) for the smoothed estimator and
    /// 1/(D(d) T) for the adapted-projection family.
    double rate_exponent(int d, int T) const {
        if (kind == EstimatorKind::SEmp) return 1.0 / (static_cast<double>(d) * T + 2.0);
        return 1.0 / (static_cast<double>(dimension_rate_denominator(d)) * T);
    }
};

struct ResolvedSchedule {
    double sigma = 0.0;
    double delta = 0.0;
};

inline ResolvedSchedule resolve_schedule(const EstimatorSpec& spec, int d, int T) {
    ResolvedSchedule out;
    const double r = spec.rate_exponent(d, T);
    const double rate_value = std::pow(static_cast<double>(spec.N), -r);
    switch (spec.sigma_rule.type) {
        case BandwidthRule::Type::Rate: out.sigma = rate_value; break;
        case BandwidthRule::Type::Fixed: out.sigma = spec.sigma_rule.value; break;
        case BandwidthRule::Type::SigmaFraction:
            throw std::invalid_argument("sigma rule cannot reference itself");
    }
    switch (spec.delta_rule.type) {
        case BandwidthRule::Type::Rate: out.delta = rate_value; break;
        case BandwidthRule::Type::Fixed: out.delta = spec.delta_rule.value; break;
        case BandwidthRule::Type::SigmaFraction:
            out.delta = out.sigma * (spec.delta_rule.value > 0.0 ? spec.delta_rule.value : 0.25);
            break;
    }
    return out;
}

/// Shifts used by as_emp under this spec: the diagonal scheme, except that
/// a single part is left unshifted.
inline std::vector<std::vector<double>> zeta_for(const EstimatorSpec& spec, const GridSpec& g) {
    if (spec.zeta_scheme != "diagonal")
        throw std::invalid_argument("unknown zeta scheme: " + spec.zeta_scheme);
    if (spec.M == 1) return {std::vector<double>(static_cast<std::size_t>(g.dimension), 0.0)};
    return zeta_default(spec.M, g);
}

inline DiscretePathMeasure build_estimator(const EstimatorSpec& spec,
                                           const std::vector<Path>& samples,
                                           const SeededSampler& noise) {
    if (samples.empty()) throw std::invalid_argument("build_estimator: no samples");
    if (spec.N != samples.size())
        throw std::invalid_argument("build_estimator: sample count differs from spec N");
    const int d = samples[0].d, T = samples[0].T;
    const ResolvedSchedule s = resolve_schedule(spec, d, T);
    switch (spec.kind) {
        case EstimatorKind::Emp:
            return build_emp(samples);
        case EstimatorKind::AEmp:
            return build_a_emp(samples, GridSpec(s.delta, d * T));
        case EstimatorKind::AS1Emp:
            return build_as1_emp(samples, noise, s.sigma, GridSpec(s.delta, d * T));
        case EstimatorKind::ASEmp: {
            const GridSpec g(s.delta, d * T);
            return build_as_emp(samples, noise, s.sigma, g, spec.M, zeta_for(spec, g));
        }
        case EstimatorKind::SEmp: {
            const std::size_t K = spec.surrogate_K > 0 ? spec.surrogate_K : 16 * spec.N;
            return build_s_emp_surrogate(samples, noise, s.sigma, GridSpec(s.delta, d * T), K);
        }
    }
    throw std::logic_error("build_estimator: unreachable");
}

// ============================================================================
// JSON form
// ============================================================================

inline nlohmann::json rule_to_json(const BandwidthRule& r) {
    switch (r.type) {
        case BandwidthRule::Type::Rate: return {{"type", "rate"}};
        case BandwidthRule::Type::Fixed: return {{"type", "fixed"}, {"value", r.value}};
        case BandwidthRule::Type::SigmaFraction:
            return {{"type", "sigma_fraction"}, {"value", r.value}};
    }
    return {};
}

inline BandwidthRule rule_from_json(const nlohmann::json& j) {
    BandwidthRule r;
    const std::string type = j.at("type").get<std::string>();
    if (type == "rate") {
        r.type = BandwidthRule::Type::Rate;
    } else if (type == "fixed") {
        r.type = BandwidthRule::Type::Fixed;
        r.value = j.at("value").get<double>();
        if (!(r.value > 0.0)) throw std::invalid_argument("bandwidth rule: value must be > 0");
    } else if (type == "sigma_fraction") {
        r.type = BandwidthRule::Type::SigmaFraction;
        r.value = j.at("value").get<double>();
        if (!(r.value > 0.0)) throw std::invalid_argument("bandwidth rule: value must be > 0");
    } else {
        throw std::invalid_argument("bandwidth rule: unknown type " + type);
    }
    return r;
}

inline nlohmann::json estimator_spec_to_json(const EstimatorSpec& s) {
    nlohmann::json j;
    j["kind"] = kind_name(s.kind);
    j["N"] = s.N;
    j["M"] = s.M;
    j["sigma"] = rule_to_json(s.sigma_rule);
    j["delta"] = rule_to_json(s.delta_rule);
    j["zeta_scheme"] = s.zeta_scheme;
    if (s.surrogate_K > 0) j["surrogate_K"] = s.surrogate_K;
    return j;
}

inline EstimatorSpec estimator_spec_from_json(const nlohmann::json& j) {
    EstimatorSpec s;
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    // N may be absent or zero inside an experiment config, where the
    // schedule supplies it per run
    s.N = j.value("N", std::size_t{0});
    s.M = j.value("M", 1);
    if (s.M < 1) throw std::invalid_argument("estimator spec: M must be >= 1");
    if (s.M > 1 && s.kind != EstimatorKind::ASEmp)
        throw std::invalid_argument("estimator spec: M > 1 only applies to as_emp");
    if (j.contains("sigma")) s.sigma_rule = rule_from_json(j.at("sigma"));
    if (j.contains("delta")) s.delta_rule = rule_from_json(j.at("delta"));
    else if (s.kind == EstimatorKind::SEmp)
        s.delta_rule = {BandwidthRule::Type::SigmaFraction, 0.25};
    s.zeta_scheme = j.value("zeta_scheme", std::string("diagonal"));
    s.surrogate_K = j.value("surrogate_K", std::size_t{0});
    return s;
}

}  // namespace aot
