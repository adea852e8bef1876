// SPDX-License-Identifier: MIT
//
// Gaussian kernels and Gaussian mixture ground-truth models. Mixtures are
// closed under Gaussian smoothing (componentwise scale s -> sqrt(s^2 +
// sigma^2)), which gives exact smoothed conditional densities and makes
// them the model family of choice for the convergence experiments.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "aot/numerics.hpp"
#include "aot/path_measure.hpp"
#include "aot/rng.hpp"

namespace aot {

// ============================================================================
// Kernel and mixture types
// ============================================================================

/// Isotropic centered Gaussian N(0, sigma^2 I_dim).
struct GaussianKernel {
    double sigma = 1.0;
    int dim = 1;

    GaussianKernel(double sigma_, int dim_) : sigma(sigma_), dim(dim_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("GaussianKernel: sigma must be > 0");
        if (dim <= 0) throw std::invalid_argument("GaussianKernel: dim must be positive");
    }
};

struct MixtureComponent {
    double weight = 1.0;
    std::vector<double> center;  // flat, length d*T
    double scale = 0.0;          // componentwise isotropic std dev, >= 0
};

/// Finite Gaussian mixture on R^{dT} with density
/// p(x) = sum_k w_k phi_{s_k}(x - c_k), s_k >= 0 (s_k = 0 is a point mass).
class GaussianMixture {
public:
    GaussianMixture(int d, int T, std::vector<MixtureComponent> components)
        : d_(d), T_(T), components_(std::move(components)) {
        if (d_ <= 0 || T_ <= 0) throw std::invalid_argument("mixture: d, T must be positive");
        if (components_.empty()) throw std::invalid_argument("mixture: no components");
        double total = 0.0;
        for (const auto& c : components_) {
            if (!(c.weight > 0.0)) throw std::invalid_argument("mixture: weights must be > 0");
            if (c.scale < 0.0) throw std::invalid_argument("mixture: negative scale");
            if (c.center.size() != static_cast<std::size_t>(d_) * T_)
                throw std::invalid_argument("mixture: center dimension mismatch");
            total += c.weight;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("mixture: weights must sum to 1");
    }

    int d() const { return d_; }
    int T() const { return T_; }
    int dim() const { return d_ * T_; }
    const std::vector<MixtureComponent>& components() const { return components_; }

    /// The sigma-smoothed mixture: same centers and weights, scales
    /// sqrt(s_k^2 + sigma^2). sigma = 0 returns the mixture unchanged.
    GaussianMixture smoothed(double sigma) const {
        if (sigma < 0.0) throw std::invalid_argument("smoothed: sigma must be >= 0");
        std::vector<MixtureComponent> comps = components_;
        for (auto& c : comps) c.scale = std::sqrt(c.scale * c.scale + sigma * sigma);
        return GaussianMixture(d_, T_, std::move(comps));
    }

    double density(const std::vector<double>& x) const {
        if (x.size() != static_cast<std::size_t>(dim()))
            throw std::invalid_argument("density: dimension mismatch");
        double p = 0.0;
        for (const auto& c : components_) {
            double sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double diff = x[i] - c.center[i];
                sq += diff * diff;
            }
            p += c.weight * normal_pdf_k(sq, c.scale, dim());
        }
        return p;
    }

private:
    int d_;
    int T_;
    std::vector<MixtureComponent> components_;
};

// ============================================================================
// Sampling
// ============================================================================

/// n i.i.d. draws from N(0, sigma^2 I_dim); deterministic given the sampler.
inline std::vector<std::vector<double>> sample_gaussian(SeededSampler& s,
                                                        const GaussianKernel& k, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_gaussian: n must be >= 1");
    std::vector<std::vector<double>> out(n);
    for (auto& v : out) {
        v.resize(static_cast<std::size_t>(k.dim));
        for (double& x : v) x = k.sigma * s.next_normal();
    }
    return out;
}

/// n i.i.d. path samples from the mixture. Each draw consumes one uniform
/// (component index) and d*T normals, independent of the chosen component,
/// so the stream layout is fixed.
inline std::vector<Path> mixture_sample(SeededSampler& s, const GaussianMixture& g,
                                        std::size_t n) {
    if (n < 1) throw std::invalid_argument("mixture_sample: n must be >= 1");
    std::vector<Path> out;
    out.reserve(n);
    const std::size_t dim = static_cast<std::size_t>(g.dim());
    for (std::size_t i = 0; i < n; ++i) {
        const double u = s.next_uniform();
        double acc = 0.0;
        std::size_t pick = g.components().size() - 1;
        for (std::size_t k = 0; k < g.components().size(); ++k) {
            acc += g.components()[k].weight;
            if (u <= acc) {
                pick = k;
                break;
            }
        }
        const MixtureComponent& c = g.components()[pick];
        std::vector<double> coords(dim);
        for (std::size_t j = 0; j < dim; ++j) coords[j] = c.center[j] + c.scale * s.next_normal();
        out.emplace_back(g.d(), g.T(), std::move(coords));
    }
    return out;
}

// ============================================================================
// Smoothed conditional densities
// ============================================================================

namespace detail {

/// Posterior component weights alpha_k(x_{1:t}) of the sigma-smoothed
/// mixture given a prefix, computed in log space.
inline std::vector<double> smoothed_prefix_weights(const GaussianMixture& g, double sigma,
                                                   const std::vector<double>& prefix) {
    const std::size_t dt = prefix.size();
    const auto& comps = g.components();
    std::vector<double> logw(comps.size());
    double maxlog = -1e300;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const double s2 = comps[k].scale * comps[k].scale + sigma * sigma;
        double sq = 0.0;
        for (std::size_t i = 0; i < dt; ++i) {
            const double diff = prefix[i] - comps[k].center[i];
            sq += diff * diff;
        }
        logw[k] = std::log(comps[k].weight) - 0.5 * static_cast<double>(dt) * std::log(2.0 * kPi * s2) -
                  0.5 * sq / s2;
        maxlog = std::max(maxlog, logw[k]);
    }
    double total = 0.0;
    for (double& lw : logw) {
        lw = std::exp(lw - maxlog);
        total += lw;
    }
    for (double& w : logw) w /= total;
    return logw;
}

}  // namespace detail

/// Conditional density of the sigma-smoothed mixture at stage t+1 given the
/// prefix x_{1:t}: sum_k alpha_k(x_{1:t}) phi_{sqrt(s_k^2+sigma^2)}(x_{t+1} -
/// c_k[t+1]). The prefix has t*d coordinates, the point d coordinates.
inline double smoothed_conditional_density(const GaussianMixture& g, double sigma,
                                           const std::vector<double>& prefix,
                                           const std::vector<double>& point) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("smoothed_conditional_density: sigma must be > 0");
    if (prefix.empty() || prefix.size() % static_cast<std::size_t>(g.d()) != 0)
        throw std::invalid_argument("smoothed_conditional_density: bad prefix length");
    const int t = static_cast<int>(prefix.size()) / g.d();
    if (t < 1 || t > g.T() - 1)
        throw std::invalid_argument("smoothed_conditional_density: t out of range");
    if (point.size() != static_cast<std::size_t>(g.d()))
        throw std::invalid_argument("smoothed_conditional_density: bad point length");

    const std::vector<double> alpha = detail::smoothed_prefix_weights(g, sigma, prefix);
    double p = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const MixtureComponent& c = g.components()[k];
        const double s = std::sqrt(c.scale * c.scale + sigma * sigma);
        double sq = 0.0;
        for (int i = 0; i < g.d(); ++i) {
            const double diff = point[static_cast<std::size_t>(i)] -
                                c.center[static_cast<std::size_t>(t) * g.d() + i];
            sq += diff * diff;
        }
        p += alpha[k] * normal_pdf_k(sq, s, g.d());
    }
    return p;
}

// ============================================================================
// Lipschitz-kernel diagnostic (d = 1 only)
// ============================================================================

namespace detail {

/// W1 between two 1-d smoothed conditionals via CDF distance.
inline double conditional_w1_1d(const GaussianMixture& g, double sigma,
                                const std::vector<double>& pa, const std::vector<double>& pb) {
    const int t = static_cast<int>(pa.size());
    const std::vector<double> wa = smoothed_prefix_weights(g, sigma, pa);
    const std::vector<double> wb = smoothed_prefix_weights(g, sigma, pb);
    double lo = 1e300, hi = -1e300, smax = 0.0;
    for (const auto& c : g.components()) {
        const double center = c.center[static_cast<std::size_t>(t)];
        const double s = std::sqrt(c.scale * c.scale + sigma * sigma);
        lo = std::min(lo, center - 10.0 * s);
        hi = std::max(hi, center + 10.0 * s);
        smax = std::max(smax, s);
    }
    auto cdf_gap = [&](double x) {
        double fa = 0.0, fb = 0.0;
        for (std::size_t k = 0; k < wa.size(); ++k) {
            const auto& c = g.components()[k];
            const double s = std::sqrt(c.scale * c.scale + sigma * sigma);
            const double z = x - c.center[static_cast<std::size_t>(t)];
            fa += wa[k] * normal_cdf(z, s);
            fb += wb[k] * normal_cdf(z, s);
        }
        return std::abs(fa - fb);
    };
    return simpson(cdf_gap, lo, hi, 4000);
}

}  // namespace detail

/// Empirical lower bound on the Lipschitz constant of prefix -> conditional
/// law for the sigma-smoothed mixture: max over probe pairs of
/// W1(cond_a, cond_b) / ||a - b||. Diagnostic only; d = 1 probes.
inline double lipschitz_kernel_estimate(const GaussianMixture& g, double sigma,
                                        const std::vector<std::vector<double>>& probes) {
    if (!(sigma > 0.0)) throw std::invalid_argument("lipschitz_kernel_estimate: sigma must be > 0");
    if (g.d() != 1) throw std::invalid_argument("lipschitz_kernel_estimate: requires d = 1");
    double best = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        for (std::size_t j = i + 1; j < probes.size(); ++j) {
            if (probes[i].size() != probes[j].size()) continue;
            double dist = 0.0;
            for (std::size_t k = 0; k < probes[i].size(); ++k)
                dist += std::abs(probes[i][k] - probes[j][k]);
            if (dist < 1e-14) continue;  // identical probes excluded
            const double w1 = detail::conditional_w1_1d(g, sigma, probes[i], probes[j]);
            best = std::max(best, w1 / dist);
        }
    }
    return best;
}

// ============================================================================
// Mixture file format
// ============================================================================
//
// { "d", "T", "components": [ { "w", "center": [...], "scale" } ] }

inline nlohmann::json mixture_to_json(const GaussianMixture& g) {
    nlohmann::json j;
    j["d"] = g.d();
    j["T"] = g.T();
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : g.components())
        comps.push_back({{"w", c.weight}, {"center", c.center}, {"scale", c.scale}});
    j["components"] = std::move(comps);
    return j;
}

inline GaussianMixture mixture_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    const int T = j.at("T").get<int>();
    std::vector<MixtureComponent> comps;
    for (const auto& jc : j.at("components")) {
        MixtureComponent c;
        c.weight = jc.at("w").get<double>();
        c.center = jc.at("center").get<std::vector<double>>();
        c.scale = jc.at("scale").get<double>();
        comps.push_back(std::move(c));
    }
    return GaussianMixture(d, T, std::move(comps));
}

}  // namespace aot
