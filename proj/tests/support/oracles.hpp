// SPDX-License-Identifier: MIT
//
// Test-only brute-force oracles. These deliberately take the slow,
// enumerative road so they stay independent of the library's solvers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "aot/path_measure.hpp"
#include "aot/transport.hpp"

namespace testsupport {

/// Exhaustive vertex enumeration for the transportation polytope: every
/// spanning tree of the complete bipartite graph is a basis; the unique
/// tree flow, when nonnegative, is a vertex. Requires n*m <= 20.
inline double transport_vertex_enumeration(const aot::CostMatrix& c, const std::vector<double>& a,
                                           const std::vector<double>& b) {
    const int n = static_cast<int>(c.n), m = static_cast<int>(c.m);
    const int edges = n * m;
    const int nodes = n + m;
    if (edges > 20) throw std::invalid_argument("vertex enumeration capped at 20 edges");

    double best = 1e300;
    for (std::uint32_t mask = 0; mask < (1u << edges); ++mask) {
        if (__builtin_popcount(mask) != nodes - 1) continue;

        // union-find spanning check
        std::vector<int> parent(static_cast<std::size_t>(nodes));
        for (int i = 0; i < nodes; ++i) parent[static_cast<std::size_t>(i)] = i;
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
            return x;
        };
        bool acyclic = true;
        for (int e = 0; e < edges && acyclic; ++e) {
            if (!(mask & (1u << e))) continue;
            const int u = e / m, v = n + e % m;
            const int ru = find(u), rv = find(v);
            if (ru == rv)
                acyclic = false;
            else
                parent[static_cast<std::size_t>(ru)] = rv;
        }
        if (!acyclic) continue;

        // peel leaves to get the unique tree flow
        std::vector<std::vector<int>> inc(static_cast<std::size_t>(nodes));
        for (int e = 0; e < edges; ++e) {
            if (!(mask & (1u << e))) continue;
            inc[static_cast<std::size_t>(e / m)].push_back(e);
            inc[static_cast<std::size_t>(n + e % m)].push_back(e);
        }
        std::vector<double> excess(static_cast<std::size_t>(nodes));
        for (int i = 0; i < n; ++i) excess[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)];
        for (int j = 0; j < m; ++j) excess[static_cast<std::size_t>(n + j)] = -b[static_cast<std::size_t>(j)];
        std::vector<double> flow(static_cast<std::size_t>(edges), 0.0);
        std::vector<char> edge_done(static_cast<std::size_t>(edges), 0);
        std::vector<int> degree(static_cast<std::size_t>(nodes));
        for (int v = 0; v < nodes; ++v) degree[static_cast<std::size_t>(v)] = static_cast<int>(inc[static_cast<std::size_t>(v)].size());

        bool feasible = true;
        for (int step = 0; step < nodes - 1 && feasible; ++step) {
            int leaf = -1;
            for (int v = 0; v < nodes; ++v)
                if (degree[static_cast<std::size_t>(v)] == 1) {
                    leaf = v;
                    break;
                }
            if (leaf < 0) {
                feasible = false;
                break;
            }
            int e = -1;
            for (int cand : inc[static_cast<std::size_t>(leaf)])
                if (!edge_done[static_cast<std::size_t>(cand)]) e = cand;
            const int u = e / m, v = n + e % m;
            const int other = (leaf == u) ? v : u;
            // flow oriented source -> sink
            const double f = (leaf < n) ? excess[static_cast<std::size_t>(leaf)]
                                        : -excess[static_cast<std::size_t>(leaf)];
            if (f < -1e-12) feasible = false;
            flow[static_cast<std::size_t>(e)] = f;
            excess[static_cast<std::size_t>(other)] += excess[static_cast<std::size_t>(leaf)];
            excess[static_cast<std::size_t>(leaf)] = 0.0;
            edge_done[static_cast<std::size_t>(e)] = 1;
            degree[static_cast<std::size_t>(leaf)]--;
            degree[static_cast<std::size_t>(other)]--;
        }
        if (!feasible) continue;

        double value = 0.0;
        for (int e = 0; e < edges; ++e)
            value += flow[static_cast<std::size_t>(e)] * c.at(static_cast<std::size_t>(e / m),
                                                              static_cast<std::size_t>(e % m));
        best = std::min(best, value);
    }
    return best;
}

/// Conditional-moment coefficient straight from the atom list, grouping
/// prefixes with a map rather than the prefix tree.
inline double brute_linear_moment_coefficient(const aot::DiscretePathMeasure& m) {
    double alpha = 0.0;
    for (int t = 1; t <= m.T() - 1; ++t) {
        std::map<std::vector<double>, std::pair<double, double>> groups;  // prefix -> (mass, mean accum)
        for (const aot::Atom& a : m.atoms()) {
            std::vector<double> prefix(a.path.coords.begin(),
                                       a.path.coords.begin() + static_cast<std::size_t>(t) * m.d());
            double next_sq = 0.0;
            for (int k = 0; k < m.d(); ++k) {
                const double c = a.path.at(t, k);
                next_sq += c * c;
            }
            auto& g = groups[prefix];
            g.first += a.weight;
            g.second += a.weight * std::sqrt(next_sq);
        }
        for (const auto& [prefix, g] : groups) {
            double prefix_norm = 0.0;
            for (int s = 0; s < t; ++s) {
                double sq = 0.0;
                for (int k = 0; k < m.d(); ++k) {
                    const double c = prefix[static_cast<std::size_t>(s) * m.d() + k];
                    sq += c * c;
                }
                prefix_norm += std::sqrt(sq);
            }
            alpha = std::max(alpha, (g.second / g.first) / (prefix_norm + 1.0));
        }
    }
    return alpha;
}

}  // namespace testsupport
