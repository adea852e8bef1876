// SPDX-License-Identifier: MIT
//
// Seeded random measure generators for oracle cross-checks and randomized
// sweeps. The lattice generator draws stage values from a small shared
// lattice so instance pairs collide on atoms and prefixes with positive
// probability — that is where bi-causality actually bites; measures with
// almost-surely disjoint supports would make the adapted checks vacuous.
#pragma once

#include <cmath>
#include <vector>

#include "aot/path_measure.hpp"
#include "aot/rng.hpp"

namespace aot {

namespace detail {

inline void grow_lattice_paths(SeededSampler& s, int d, int T, int max_vals, int depth,
                               std::vector<double>& prefix, double mass,
                               std::vector<Atom>& out) {
    static constexpr double kLattice[] = {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5};
    constexpr int kLatticeSize = 7;
    if (depth == T) {
        out.push_back({Path(d, T, prefix), mass});
        return;
    }
    const int k = 1 + static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(max_vals));
    // distinct stage values: sample lattice indices without replacement
    std::vector<int> picks;
    while (static_cast<int>(picks.size()) < k) {
        const int idx = static_cast<int>(s.next_u64() % kLatticeSize);
        bool fresh = true;
        for (int p : picks) fresh = fresh && (p != idx);
        if (fresh) picks.push_back(idx);
    }
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& x : w) {
        x = 0.05 - std::log(s.next_uniform());
        total += x;
    }
    for (int i = 0; i < k; ++i) {
        for (int c = 0; c < d; ++c) {
            const int idx = static_cast<int>(s.next_u64() % kLatticeSize);
            prefix.push_back(c == 0 ? kLattice[picks[static_cast<std::size_t>(i)]]
                                    : kLattice[idx]);
        }
        grow_lattice_paths(s, d, T, max_vals, depth + 1, prefix,
                           mass * w[static_cast<std::size_t>(i)] / total, out);
        prefix.resize(prefix.size() - static_cast<std::size_t>(d));
    }
}

}  // namespace detail

/// Random tree-structured measure with stage values on a small lattice.
inline DiscretePathMeasure random_lattice_measure(SeededSampler& s, int d, int T,
                                                  int max_vals_per_stage) {
    std::vector<Atom> atoms;
    std::vector<double> prefix;
    detail::grow_lattice_paths(s, d, T, max_vals_per_stage, 0, prefix, 1.0, atoms);
    return DiscretePathMeasure::from_atoms(d, T, std::move(atoms));
}

/// Random measure with continuous (normal) atom coordinates.
inline DiscretePathMeasure random_cloud_measure(SeededSampler& s, int d, int T, int n_atoms,
                                                double spread = 1.0) {
    std::vector<Atom> atoms;
    std::vector<double> w(static_cast<std::size_t>(n_atoms));
    double total = 0.0;
    for (double& x : w) {
        x = 0.05 - std::log(s.next_uniform());
        total += x;
    }
    for (int i = 0; i < n_atoms; ++i) {
        std::vector<double> coords(static_cast<std::size_t>(d) * T);
        for (double& c : coords) c = spread * s.next_normal();
        atoms.push_back({Path(d, T, std::move(coords)), w[static_cast<std::size_t>(i)] / total});
    }
    return DiscretePathMeasure::from_atoms(d, T, std::move(atoms));
}

}  // namespace aot
