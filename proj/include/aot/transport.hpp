// SPDX-License-Identifier: MIT
//
// Exact non-adapted discrete optimal transport. The workhorse is a
// successive-shortest-path solver with node potentials on the dense
// bipartite transportation graph: exact up to floating-point roundoff,
// returns the optimal coupling and feasible dual potentials, and is fast
// enough for the conditional subproblems the nested-distance DP spawns.
//
// W1 uses the path sum-norm cost, TV / TV1 come in closed form over the
// union support and (for cross-checking) in primal coupling form.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "aot/path_measure.hpp"

namespace aot {

// ============================================================================
// Cost matrices and couplings
// ============================================================================

struct CostMatrix {
    std::size_t n = 0, m = 0;
    std::vector<double> cost;  // row-major n x m

    CostMatrix(std::size_t n_, std::size_t m_) : n(n_), m(m_), cost(n_ * m_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return cost[i * m + j]; }
    double at(std::size_t i, std::size_t j) const { return cost[i * m + j]; }

    void validate() const {
        for (double c : cost)
            if (!(c >= 0.0) || !std::isfinite(c))
                throw std::invalid_argument("CostMatrix: entries must be finite and >= 0");
    }
};

/// Joint weights over a source/target support pair, with marginal checks.
struct Coupling {
    std::size_t n = 0, m = 0;
    std::vector<double> weight;  // row-major n x m, >= 0

    Coupling() = default;
    Coupling(std::size_t n_, std::size_t m_) : n(n_), m(m_), weight(n_ * m_, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return weight[i * m + j]; }
    double at(std::size_t i, std::size_t j) const { return weight[i * m + j]; }

    double max_marginal_violation(const std::vector<double>& a, const std::vector<double>& b) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m; ++j) row += at(i, j);
            worst = std::max(worst, std::abs(row - a[i]));
        }
        for (std::size_t j = 0; j < m; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < n; ++i) col += at(i, j);
            worst = std::max(worst, std::abs(col - b[j]));
        }
        return worst;
    }
};

struct OtSolution {
    double value = 0.0;
    Coupling coupling;
    std::vector<double> dual_source;  // alpha_i
    std::vector<double> dual_target;  // beta_j, with alpha_i + beta_j <= c_ij
};

// ============================================================================
// Exact transportation solver (successive shortest paths + potentials)
// ============================================================================

inline OtSolution solve_ot(const CostMatrix& c, const std::vector<double>& a,
                           const std::vector<double>& b) {
    const std::size_t n = c.n, m = c.m;
    if (a.size() != n || b.size() != m)
        throw std::invalid_argument("solve_ot: marginal dimensions do not match cost matrix");
    c.validate();
    double sa = std::accumulate(a.begin(), a.end(), 0.0);
    double sb = std::accumulate(b.begin(), b.end(), 0.0);
    for (double w : a)
        if (!(w > 0.0)) throw std::invalid_argument("solve_ot: source weights must be > 0");
    for (double w : b)
        if (!(w > 0.0)) throw std::invalid_argument("solve_ot: target weights must be > 0");
    if (std::abs(sa - 1.0) > 1e-9 || std::abs(sb - 1.0) > 1e-9)
        throw std::invalid_argument("solve_ot: marginals must sum to 1");

    std::vector<double> supply = a, demand = b;
    Coupling plan(n, m);
    // Node potentials h, sources then sinks. Invariant: every residual arc
    // has reduced cost cost + h[from] - h[to] >= 0.
    std::vector<double> h(n + m, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    const double kDone = 1e-15;

    double remaining = 1.0;
    const std::size_t max_rounds = 100 * (n + m) + 10000;
    std::size_t rounds = 0;
    while (remaining > kDone) {
        if (++rounds > max_rounds) throw std::runtime_error("solve_ot: augmentation limit hit");
        // Dijkstra over the residual graph with reduced costs, seeded at
        // every source that still has supply. Dense O((n+m)^2).
        std::vector<double> dist(n + m, inf);
        std::vector<int> prev(n + m, -1);  // predecessor node
        std::vector<char> done(n + m, 0);
        for (std::size_t i = 0; i < n; ++i)
            if (supply[i] > kDone) dist[i] = 0.0;

        std::size_t target = n + m;
        while (true) {
            std::size_t u = n + m;
            double best = inf;
            for (std::size_t v = 0; v < n + m; ++v)
                if (!done[v] && dist[v] < best) {
                    best = dist[v];
                    u = v;
                }
            if (u == n + m) break;
            done[u] = 1;
            if (u >= n && demand[u - n] > kDone) {
                target = u;
                break;
            }
            if (u < n) {
                // forward arcs u -> sink j, unbounded capacity
                for (std::size_t j = 0; j < m; ++j) {
                    const double red = std::max(c.at(u, j) + h[u] - h[n + j], 0.0);
                    if (dist[u] + red < dist[n + j]) {
                        dist[n + j] = dist[u] + red;
                        prev[n + j] = static_cast<int>(u);
                    }
                }
            } else {
                // backward arcs sink -> source i, present where flow > 0
                const std::size_t j = u - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (plan.at(i, j) <= kDone) continue;
                    const double red = std::max(-c.at(i, j) + h[u] - h[i], 0.0);
                    if (dist[u] + red < dist[i]) {
                        dist[i] = dist[u] + red;
                        prev[i] = static_cast<int>(u);
                    }
                }
            }
        }
        if (target == n + m) throw std::runtime_error("solve_ot: no augmenting path");

        // Unreached nodes count as dist >= dist[target]; capping keeps every
        // residual reduced cost nonnegative for the next round.
        const double dt = dist[target];
        for (std::size_t v = 0; v < n + m; ++v) h[v] += std::min(dist[v], dt);

        // Trace the path and find the bottleneck.
        double bottleneck = demand[target - n];
        {
            std::size_t v = target;
            while (prev[v] != -1) {
                const std::size_t u = static_cast<std::size_t>(prev[v]);
                if (u < n && v >= n) {
                    // forward arc: no capacity bound
                } else {
                    bottleneck = std::min(bottleneck, plan.at(v, u - n));
                }
                v = u;
            }
            bottleneck = std::min(bottleneck, supply[v]);
        }
        {
            std::size_t v = target;
            while (prev[v] != -1) {
                const std::size_t u = static_cast<std::size_t>(prev[v]);
                if (u < n && v >= n)
                    plan.at(u, v - n) += bottleneck;
                else
                    plan.at(v, u - n) -= bottleneck;
                v = u;
            }
            supply[v] -= bottleneck;
        }
        demand[target - n] -= bottleneck;
        remaining -= bottleneck;
    }

    OtSolution sol;
    sol.coupling = std::move(plan);
    sol.value = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) sol.value += sol.coupling.at(i, j) * c.at(i, j);
    // c_ij >= h[n+j] - h[i], so (alpha, beta) = (-h_source, h_sink) is dual
    // feasible for  max sum a_i alpha_i + sum b_j beta_j  s.t. alpha+beta <= c.
    sol.dual_source.resize(n);
    for (std::size_t i = 0; i < n; ++i) sol.dual_source[i] = -h[i];
    sol.dual_target.resize(m);
    for (std::size_t j = 0; j < m; ++j) sol.dual_target[j] = h[n + j];
    return sol;
}

/// W1 on the real line between weighted value lists, by quantile coupling.
/// Exact for cost |x - y|; values need not be sorted.
inline double w1_1d(std::vector<std::pair<double, double>> mu,
                    std::vector<std::pair<double, double>> nu) {
    std::sort(mu.begin(), mu.end());
    std::sort(nu.begin(), nu.end());
    double total = 0.0;
    std::size_t i = 0, j = 0;
    double wi = mu.empty() ? 0.0 : mu[0].second;
    double wj = nu.empty() ? 0.0 : nu[0].second;
    while (i < mu.size() && j < nu.size()) {
        const double step = std::min(wi, wj);
        total += step * std::abs(mu[i].first - nu[j].first);
        wi -= step;
        wj -= step;
        if (wi <= 1e-15) {
            ++i;
            if (i < mu.size()) wi = mu[i].second;
        }
        if (wj <= 1e-15) {
            ++j;
            if (j < nu.size()) wj = nu[j].second;
        }
    }
    return total;
}

// ============================================================================
// Distances
// ============================================================================

namespace detail {

inline void require_same_shape(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu,
                               const char* who) {
    if (!mu.same_shape(nu)) throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

inline std::vector<double> weights_of(const DiscretePathMeasure& m) {
    std::vector<double> w;
    w.reserve(m.size());
    for (const Atom& a : m.atoms()) w.push_back(a.weight);
    return w;
}

/// Walk both canonical atom lists in lockstep and report weight pairs
/// (w_mu, w_nu) over the union support via the callback.
template <typename F>
void union_support(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu, F&& f) {
    std::size_t i = 0, j = 0;
    while (i < mu.size() || j < nu.size()) {
        if (j >= nu.size() ||
            (i < mu.size() && lex_less(mu.atom(i).path.coords, nu.atom(j).path.coords))) {
            f(mu.atom(i).path, mu.atom(i).weight, 0.0);
            ++i;
        } else if (i >= mu.size() || lex_less(nu.atom(j).path.coords, mu.atom(i).path.coords)) {
            f(nu.atom(j).path, 0.0, nu.atom(j).weight);
            ++j;
        } else {
            f(mu.atom(i).path, mu.atom(i).weight, nu.atom(j).weight);
            ++i;
            ++j;
        }
    }
}

}  // namespace detail

/// First-order Wasserstein distance with the path sum-norm cost.
inline OtSolution w1_solution(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "w1");
    CostMatrix c(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
            c.at(i, j) = path_distance(mu.atom(i).path, nu.atom(j).path);
    return solve_ot(c, detail::weights_of(mu), detail::weights_of(nu));
}

inline double w1(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    // T = d = 1 reduces to the quantile formula; cheaper and exact.
    if (mu.d() == 1 && mu.T() == 1 && nu.d() == 1 && nu.T() == 1) {
        std::vector<std::pair<double, double>> a, b;
        for (const Atom& at : mu.atoms()) a.emplace_back(at.path.coords[0], at.weight);
        for (const Atom& at : nu.atoms()) b.emplace_back(at.path.coords[0], at.weight);
        return w1_1d(std::move(a), std::move(b));
    }
    return w1_solution(mu, nu).value;
}

/// Classical total variation, half the L1 distance of atom weights.
inline double tv(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "tv");
    double s = 0.0;
    detail::union_support(mu, nu, [&](const Path&, double wm, double wn) {
        s += std::abs(wm - wn);
    });
    return 0.5 * s;
}

/// Weighted total variation in closed form: int (||x|| + 1/2) d|mu - nu|.
inline double tv1_closed_form(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "tv1");
    double s = 0.0;
    detail::union_support(mu, nu, [&](const Path& p, double wm, double wn) {
        s += (sum_norm(p) + 0.5) * std::abs(wm - wn);
    });
    return s;
}

/// Weighted total variation in primal coupling form:
/// inf over couplings of int (||x|| + ||y|| + 1) 1{x != y} dpi.
inline double tv1_coupling_form(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "tv1");
    CostMatrix c(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double ni = sum_norm(mu.atom(i).path);
        for (std::size_t j = 0; j < nu.size(); ++j) {
            if (mu.atom(i).path == nu.atom(j).path) continue;  // cost 0 on the diagonal
            c.at(i, j) = ni + sum_norm(nu.atom(j).path) + 1.0;
        }
    }
    return solve_ot(c, detail::weights_of(mu), detail::weights_of(nu)).value;
}

/// Coupling form of classical TV, for cross-checks.
inline double tv_coupling_form(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "tv");
    CostMatrix c(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < nu.size(); ++j)
            c.at(i, j) = (mu.atom(i).path == nu.atom(j).path) ? 0.0 : 1.0;
    return solve_ot(c, detail::weights_of(mu), detail::weights_of(nu)).value;
}

}  // namespace aot
