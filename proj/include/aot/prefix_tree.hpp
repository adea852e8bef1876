// SPDX-License-Identifier: MIT
//
// Prefix-tree (disintegrated) view of a discrete path measure: nodes at
// depth t are the distinct prefixes x_{1:t}, edges carry conditional
// weights, and every node caches the expected remaining sum-norm
// m(prefix) = E[ sum_{s>t} ||x_s|| | x_{1:t} ]. The tree is the substrate
// for the nested-distance dynamic programs.
//
// Prefix grouping uses exact coordinate equality: the estimator pipelines
// only disintegrate post-projection measures whose coordinates are exact
// grid midpoints, so no tolerance is needed.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aot/path_measure.hpp"

namespace aot {

struct PrefixNode {
    int depth = 0;               // prefix length; root has depth 0
    int parent = -1;
    std::vector<double> value;   // stage-`depth` coordinates (empty at root)
    double cond_weight = 1.0;    // P(value | parent prefix)
    double path_weight = 1.0;    // absolute prefix probability
    double prefix_norm = 0.0;    // sum of stage norms along the prefix
    double m_future = 0.0;       // expected remaining sum-norm given the prefix
    std::size_t atom_lo = 0;     // atoms under this prefix: [atom_lo, atom_hi)
    std::size_t atom_hi = 0;
    std::vector<int> children;   // child indices, ascending in value order
};

class PrefixTree {
public:
    PrefixTree() = default;

    int d() const { return d_; }
    int T() const { return T_; }
    int root() const { return 0; }
    std::size_t node_count() const { return nodes_.size(); }
    const PrefixNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

    /// Builds the tree from a canonical measure. Atoms are lexicographically
    /// sorted, so each prefix group is a contiguous range and children come
    /// out in canonical order.
    static PrefixTree build(const DiscretePathMeasure& m) {
        PrefixTree tree;
        tree.d_ = m.d();
        tree.T_ = m.T();
        tree.nodes_.push_back(PrefixNode{});
        tree.nodes_[0].atom_hi = m.size();
        tree.grow(m, 0, 0, m.size(), 0);
        tree.fill_future_norms(0);
        return tree;
    }

private:
    void grow(const DiscretePathMeasure& m, int parent, std::size_t lo, std::size_t hi,
              int depth) {
        if (depth == T_) return;
        const double parent_mass = nodes_[static_cast<std::size_t>(parent)].path_weight;
        std::size_t i = lo;
        while (i < hi) {
            std::size_t j = i + 1;
            while (j < hi && same_stage_value(m, i, j, depth)) ++j;
            double mass = 0.0;
            for (std::size_t k = i; k < j; ++k) mass += m.atom(k).weight;

            PrefixNode n;
            n.depth = depth + 1;
            n.parent = parent;
            n.atom_lo = i;
            n.atom_hi = j;
            n.value.resize(static_cast<std::size_t>(d_));
            for (int k = 0; k < d_; ++k) n.value[static_cast<std::size_t>(k)] = m.atom(i).path.at(depth, k);
            n.cond_weight = mass / parent_mass;
            n.path_weight = mass;
            double sq = 0.0;
            for (double v : n.value) sq += v * v;
            n.prefix_norm = nodes_[static_cast<std::size_t>(parent)].prefix_norm + std::sqrt(sq);

            const int idx = static_cast<int>(nodes_.size());
            nodes_.push_back(std::move(n));
            nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
            grow(m, idx, i, j, depth + 1);
            i = j;
        }
    }

    bool same_stage_value(const DiscretePathMeasure& m, std::size_t a, std::size_t b,
                          int depth) const {
        for (int k = 0; k < d_; ++k)
            if (m.atom(a).path.at(depth, k) != m.atom(b).path.at(depth, k)) return false;
        return true;
    }

    double fill_future_norms(int idx) {
        PrefixNode& n = nodes_[static_cast<std::size_t>(idx)];
        double m = 0.0;
        for (int c : n.children) {
            const double child_future = fill_future_norms(c);
            const PrefixNode& cn = nodes_[static_cast<std::size_t>(c)];
            double sq = 0.0;
            for (double v : cn.value) sq += v * v;
            m += cn.cond_weight * (std::sqrt(sq) + child_future);
        }
        n.m_future = m;
        return m;
    }

    int d_ = 0;
    int T_ = 0;
    std::vector<PrefixNode> nodes_;
};

inline PrefixTree disintegrate(const DiscretePathMeasure& m) { return PrefixTree::build(m); }

/// Reassembles the measure from the tree; inverse of disintegrate.
inline DiscretePathMeasure flatten(const PrefixTree& tree) {
    std::vector<Atom> atoms;
    std::vector<double> coords;
    const std::size_t dim = static_cast<std::size_t>(tree.d()) * tree.T();
    coords.reserve(dim);

    auto walk = [&](auto&& self, int idx) -> void {
        const PrefixNode& n = tree.node(idx);
        for (double v : n.value) coords.push_back(v);
        if (n.depth == tree.T()) {
            atoms.push_back({Path(tree.d(), tree.T(), coords), n.path_weight});
        } else {
            for (int c : n.children) self(self, c);
        }
        coords.resize(coords.size() - n.value.size());
    };
    walk(walk, tree.root());
    return DiscretePathMeasure::from_atoms(tree.d(), tree.T(), std::move(atoms));
}

/// Smallest alpha with E[ ||x_{t+1}|| | x_{1:t} ] <= alpha (||x_{1:t}|| + 1)
/// over every observed prefix (t = 1..T-1). Zero when T == 1.
inline double linear_moment_coefficient(const PrefixTree& tree) {
    if (tree.node_count() == 0) throw std::invalid_argument("linear_moment_coefficient: empty tree");
    double alpha = 0.0;
    for (std::size_t i = 1; i < tree.node_count(); ++i) {  // skip root: prefixes start at t=1
        const PrefixNode& n = tree.node(static_cast<int>(i));
        if (n.depth >= tree.T() || n.children.empty()) continue;
        double cond_mean = 0.0;
        for (int c : n.children) {
            const PrefixNode& cn = tree.node(c);
            double sq = 0.0;
            for (double v : cn.value) sq += v * v;
            cond_mean += cn.cond_weight * std::sqrt(sq);
        }
        alpha = std::max(alpha, cond_mean / (n.prefix_norm + 1.0));
    }
    return alpha;
}

}  // namespace aot
