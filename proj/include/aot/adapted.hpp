// SPDX-License-Identifier: MIT
//
// Adapted (nested) transport distances between discrete path measures.
//
// AW1 is computed by backward induction over pairs of prefix-tree nodes:
// the conditional problem at a pair is an exact OT whose cost adds the
// stage displacement to the already-solved cost-to-go of the child pair.
// AV1 runs the same induction for the whole-path cost
// (||x|| + ||y|| + 1) 1{x != y}, restoring additivity with the
// prefix-equality flag: once prefixes differ, the remaining cost is
// coupling-independent (accrued norms plus cached expected future norms);
// while they agree, the stage OT chooses between staying equal (child
// value) and splitting (full weighted cost).
//
// bicausal_lp_oracle solves the same problems as one explicit LP over
// joint path weights with linear bi-causality constraints. It is slow by
// design and exists to witness the DP's correctness.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "aot/lp.hpp"
#include "aot/path_measure.hpp"
#include "aot/prefix_tree.hpp"
#include "aot/transport.hpp"

namespace aot {

// ============================================================================
// Nested value tables
// ============================================================================

/// Cost-to-go values of the AW1 dynamic program: for each stage t, the map
/// from (mu-prefix node, nu-prefix node) to the conditional distance of the
/// remaining stages. Stage T is identically zero and stage 0 holds the root.
class NestedValueTable {
public:
    explicit NestedValueTable(int T = 0) : T_(T), stages_(static_cast<std::size_t>(T) + 1) {}

    static std::uint64_t key(int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    void set(int t, int a, int b, double v) { stages_[static_cast<std::size_t>(t)][key(a, b)] = v; }

    bool contains(int t, int a, int b) const {
        return stages_[static_cast<std::size_t>(t)].count(key(a, b)) > 0;
    }

    /// V_t at a node pair; stage T is 0 by construction.
    double at(int t, int a, int b) const {
        if (t == T_) return 0.0;
        return stages_[static_cast<std::size_t>(t)].at(key(a, b));
    }

    const std::unordered_map<std::uint64_t, double>& stage(int t) const {
        return stages_[static_cast<std::size_t>(t)];
    }

    double root() const { return stages_[0].at(key(0, 0)); }
    int horizon() const { return T_; }

private:
    int T_;
    std::vector<std::unordered_map<std::uint64_t, double>> stages_;
};

// ============================================================================
// AW1 by backward induction
// ============================================================================

namespace detail {

inline double stage_value_distance(const PrefixNode& a, const PrefixNode& b) {
    double sq = 0.0;
    for (std::size_t k = 0; k < a.value.size(); ++k) {
        const double diff = a.value[k] - b.value[k];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

class Aw1Dp {
public:
    Aw1Dp(const PrefixTree& mu, const PrefixTree& nu)
        : mu_(mu), nu_(nu), table_(mu.T()) {}

    double run() {
        const double v = value(mu_.root(), nu_.root(), 0);
        return v;
    }

    NestedValueTable take_table() && { return std::move(table_); }

private:
    double value(int a, int b, int depth) {
        if (depth == mu_.T()) return 0.0;
        if (table_.contains(depth, a, b)) return table_.at(depth, a, b);

        const auto& ca = mu_.node(a).children;
        const auto& cb = nu_.node(b).children;
        double v;
        if (depth == mu_.T() - 1 && mu_.d() == 1) {
            // last stage in dimension one: exact quantile coupling
            std::vector<std::pair<double, double>> qa, qb;
            qa.reserve(ca.size());
            qb.reserve(cb.size());
            for (int c : ca) qa.emplace_back(mu_.node(c).value[0], mu_.node(c).cond_weight);
            for (int c : cb) qb.emplace_back(nu_.node(c).value[0], nu_.node(c).cond_weight);
            v = w1_1d(std::move(qa), std::move(qb));
        } else {
            CostMatrix cost(ca.size(), cb.size());
            std::vector<double> wa(ca.size()), wb(cb.size());
            for (std::size_t i = 0; i < ca.size(); ++i) {
                wa[i] = mu_.node(ca[i]).cond_weight;
                for (std::size_t j = 0; j < cb.size(); ++j)
                    cost.at(i, j) = stage_value_distance(mu_.node(ca[i]), nu_.node(cb[j])) +
                                    value(ca[i], cb[j], depth + 1);
            }
            for (std::size_t j = 0; j < cb.size(); ++j) wb[j] = nu_.node(cb[j]).cond_weight;
            v = solve_ot(cost, wa, wb).value;
        }
        table_.set(depth, a, b, v);
        return v;
    }

    const PrefixTree& mu_;
    const PrefixTree& nu_;
    NestedValueTable table_;
};

}  // namespace detail

struct Aw1Result {
    double value = 0.0;
    NestedValueTable table;
};

inline Aw1Result aw1(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "aw1");
    const PrefixTree ta = disintegrate(mu);
    const PrefixTree tb = disintegrate(nu);
    detail::Aw1Dp dp(ta, tb);
    Aw1Result r;
    r.value = dp.run();
    r.table = std::move(dp).take_table();
    return r;
}

/// AW1 when the trees are already at hand (the experiment loops reuse the
/// reference tree across hundreds of evaluations).
inline double aw1_value(const PrefixTree& mu_tree, const PrefixTree& nu_tree) {
    if (mu_tree.d() != nu_tree.d() || mu_tree.T() != nu_tree.T())
        throw std::invalid_argument("aw1: shape mismatch");
    detail::Aw1Dp dp(mu_tree, nu_tree);
    return dp.run();
}

inline double aw1_value(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "aw1");
    return aw1_value(disintegrate(mu), disintegrate(nu));
}

// ============================================================================
// AV1 by backward induction with the prefix-equality flag
// ============================================================================

namespace detail {

class Av1Dp {
public:
    Av1Dp(const PrefixTree& mu, const PrefixTree& nu) : mu_(mu), nu_(nu) {}

    double run() { return value_equal(mu_.root(), nu_.root(), 0); }

    // Optimal expected total cost given that the prefixes so far are equal.
    double value_equal(int a, int b, int depth) {
        if (depth == mu_.T()) return 0.0;
        const std::uint64_t k = NestedValueTable::key(a, b);
        if (auto it = memo_[static_cast<std::size_t>(depth)].find(k);
            it != memo_[static_cast<std::size_t>(depth)].end())
            return it->second;

        const auto& ca = mu_.node(a).children;
        const auto& cb = nu_.node(b).children;
        CostMatrix cost(ca.size(), cb.size());
        std::vector<double> wa(ca.size()), wb(cb.size());
        for (std::size_t i = 0; i < ca.size(); ++i) {
            const PrefixNode& ni = mu_.node(ca[i]);
            wa[i] = ni.cond_weight;
            for (std::size_t j = 0; j < cb.size(); ++j) {
                const PrefixNode& nj = nu_.node(cb[j]);
                if (ni.value == nj.value) {
                    cost.at(i, j) = value_equal(ca[i], cb[j], depth + 1);
                } else {
                    // split: the indicator is 1 from here on, and the
                    // remaining cost depends only on the marginals
                    cost.at(i, j) = ni.prefix_norm + ni.m_future + nj.prefix_norm + nj.m_future + 1.0;
                }
            }
        }
        for (std::size_t j = 0; j < cb.size(); ++j) wb[j] = nu_.node(cb[j]).cond_weight;
        const double v = solve_ot(cost, wa, wb).value;
        memo_[static_cast<std::size_t>(depth)].emplace(k, v);
        return v;
    }

private:
    const PrefixTree& mu_;
    const PrefixTree& nu_;
    std::unordered_map<std::uint64_t, double> memo_[64];
};

}  // namespace detail

inline double av1(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "av1");
    if (mu.T() >= 64) throw std::invalid_argument("av1: horizon too large");
    const PrefixTree ta = disintegrate(mu);
    const PrefixTree tb = disintegrate(nu);
    detail::Av1Dp dp(ta, tb);
    return dp.run();
}

// ============================================================================
// Bi-causal LP oracle
// ============================================================================

/// Exact optimum of  min sum_{ij} cost(x_i, y_j) pi_ij  over the bi-causal
/// polytope: marginal constraints plus, for every stage t and prefix pair,
/// the factorization of conditional continuation mass against the
/// conditional marginals (both directions). Guarded to small instances.
inline double bicausal_lp_oracle(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu,
                                 const std::function<double(const Path&, const Path&)>& cost) {
    detail::require_same_shape(mu, nu, "bicausal_lp_oracle");
    const std::size_t n = mu.size(), m = nu.size();
    if (n * m > 400) throw std::invalid_argument("bicausal_lp_oracle: instance too large");
    if (mu.T() >= 64) throw std::invalid_argument("bicausal_lp_oracle: horizon too large");

    const PrefixTree ta = disintegrate(mu);
    const PrefixTree tb = disintegrate(nu);

    auto var = [m](std::size_t i, std::size_t j) { return i * m + j; };
    std::vector<std::vector<double>> A;
    std::vector<double> rhs;

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(n * m, 0.0);
        for (std::size_t j = 0; j < m; ++j) row[var(i, j)] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(mu.atom(i).weight);
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> row(n * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) row[var(i, j)] = 1.0;
        A.push_back(std::move(row));
        rhs.push_back(nu.atom(j).weight);
    }

    // Causality in both directions. For a mu-node u and nu-node v at depth
    // t and each child c of u (the last is implied):
    //   sum_{i in c, j in v} pi_ij = cond(c) * sum_{i in u, j in v} pi_ij
    std::vector<int> mu_nodes_at[64], nu_nodes_at[64];
    for (std::size_t i = 0; i < ta.node_count(); ++i)
        if (ta.node(static_cast<int>(i)).depth < ta.T())
            mu_nodes_at[ta.node(static_cast<int>(i)).depth].push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < tb.node_count(); ++j)
        if (tb.node(static_cast<int>(j)).depth < tb.T())
            nu_nodes_at[tb.node(static_cast<int>(j)).depth].push_back(static_cast<int>(j));

    for (int t = 1; t <= ta.T() - 1; ++t) {
        for (int u : mu_nodes_at[t]) {
            const PrefixNode& nu_u = ta.node(u);
            for (int v : nu_nodes_at[t]) {
                const PrefixNode& nv = tb.node(v);
                for (std::size_t ci = 0; ci + 1 < nu_u.children.size(); ++ci) {
                    const PrefixNode& c = ta.node(nu_u.children[ci]);
                    std::vector<double> row(n * m, 0.0);
                    for (std::size_t i = c.atom_lo; i < c.atom_hi; ++i)
                        for (std::size_t j = nv.atom_lo; j < nv.atom_hi; ++j)
                            row[var(i, j)] += 1.0;
                    for (std::size_t i = nu_u.atom_lo; i < nu_u.atom_hi; ++i)
                        for (std::size_t j = nv.atom_lo; j < nv.atom_hi; ++j)
                            row[var(i, j)] -= c.cond_weight;
                    A.push_back(std::move(row));
                    rhs.push_back(0.0);
                }
                for (std::size_t cj = 0; cj + 1 < nv.children.size(); ++cj) {
                    const PrefixNode& c = tb.node(nv.children[cj]);
                    std::vector<double> row(n * m, 0.0);
                    for (std::size_t i = nu_u.atom_lo; i < nu_u.atom_hi; ++i)
                        for (std::size_t j = c.atom_lo; j < c.atom_hi; ++j)
                            row[var(i, j)] += 1.0;
                    for (std::size_t i = nu_u.atom_lo; i < nu_u.atom_hi; ++i)
                        for (std::size_t j = nv.atom_lo; j < nv.atom_hi; ++j)
                            row[var(i, j)] -= c.cond_weight;
                    A.push_back(std::move(row));
                    rhs.push_back(0.0);
                }
            }
        }
    }

    std::vector<double> costs(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            costs[var(i, j)] = cost(mu.atom(i).path, nu.atom(j).path);

    const LpResult r = lp_solve_eq(A, rhs, costs);
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error("bicausal_lp_oracle: LP did not reach optimality");
    return r.value;
}

/// Whole-path costs used with the oracle.
inline double sum_norm_cost(const Path& x, const Path& y) { return path_distance(x, y); }

inline double indicator_weighted_cost(const Path& x, const Path& y) {
    if (x == y) return 0.0;
    return sum_norm(x) + sum_norm(y) + 1.0;
}

// ============================================================================
// Optimal coupling assembly
// ============================================================================

namespace detail {

class Aw1CouplingAssembler {
public:
    Aw1CouplingAssembler(const PrefixTree& mu, const PrefixTree& nu, const NestedValueTable& table)
        : mu_(mu), nu_(nu), table_(table), plan_(mu.node(0).atom_hi, nu.node(0).atom_hi) {}

    Coupling assemble() {
        descend(mu_.root(), nu_.root(), 0, 1.0);
        return std::move(plan_);
    }

private:
    void descend(int a, int b, int depth, double mass) {
        if (mass <= 1e-15) return;
        if (depth == mu_.T()) {
            plan_.at(mu_.node(a).atom_lo, nu_.node(b).atom_lo) += mass;
            return;
        }
        const auto& ca = mu_.node(a).children;
        const auto& cb = nu_.node(b).children;
        CostMatrix cost(ca.size(), cb.size());
        std::vector<double> wa(ca.size()), wb(cb.size());
        for (std::size_t i = 0; i < ca.size(); ++i) {
            wa[i] = mu_.node(ca[i]).cond_weight;
            for (std::size_t j = 0; j < cb.size(); ++j)
                cost.at(i, j) = stage_value_distance(mu_.node(ca[i]), nu_.node(cb[j])) +
                                table_.at(depth + 1, ca[i], cb[j]);
        }
        for (std::size_t j = 0; j < cb.size(); ++j) wb[j] = nu_.node(cb[j]).cond_weight;
        const OtSolution stage = solve_ot(cost, wa, wb);
        for (std::size_t i = 0; i < ca.size(); ++i)
            for (std::size_t j = 0; j < cb.size(); ++j)
                descend(ca[i], cb[j], depth + 1, mass * stage.coupling.at(i, j));
    }

    const PrefixTree& mu_;
    const PrefixTree& nu_;
    const NestedValueTable& table_;
    Coupling plan_;
};

}  // namespace detail

/// One optimal bi-causal coupling for AW1 over the atom supports, assembled
/// by multiplying optimal stage couplings down the tree. Optimizers are not
/// unique; only the value is canonical.
inline Coupling aw1_coupling(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "aw1");
    const PrefixTree ta = disintegrate(mu);
    const PrefixTree tb = disintegrate(nu);
    detail::Aw1Dp dp(ta, tb);
    dp.run();
    const NestedValueTable table = std::move(dp).take_table();
    return detail::Aw1CouplingAssembler(ta, tb, table).assemble();
}

namespace detail {

class Av1CouplingAssembler {
public:
    Av1CouplingAssembler(const PrefixTree& mu, const PrefixTree& nu,
                         const DiscretePathMeasure& mu_m, const DiscretePathMeasure& nu_m)
        : mu_(mu), nu_(nu), mu_m_(mu_m), nu_m_(nu_m), dp_(mu, nu), plan_(mu_m.size(), nu_m.size()) {}

    Coupling assemble() {
        descend_equal(mu_.root(), nu_.root(), 0, 1.0);
        return std::move(plan_);
    }

private:
    // after a split any conditional coupling is optimal; use the product
    void spread_product(int a, int b, double mass) {
        const PrefixNode& na = mu_.node(a);
        const PrefixNode& nb = nu_.node(b);
        for (std::size_t i = na.atom_lo; i < na.atom_hi; ++i)
            for (std::size_t j = nb.atom_lo; j < nb.atom_hi; ++j)
                plan_.at(i, j) += mass * (mu_m_.atom(i).weight / na.path_weight) *
                                  (nu_m_.atom(j).weight / nb.path_weight);
    }

    void descend_equal(int a, int b, int depth, double mass) {
        if (mass <= 1e-15) return;
        if (depth == mu_.T()) {
            plan_.at(mu_.node(a).atom_lo, nu_.node(b).atom_lo) += mass;
            return;
        }
        const auto& ca = mu_.node(a).children;
        const auto& cb = nu_.node(b).children;
        CostMatrix cost(ca.size(), cb.size());
        std::vector<double> wa(ca.size()), wb(cb.size());
        for (std::size_t i = 0; i < ca.size(); ++i) {
            const PrefixNode& ni = mu_.node(ca[i]);
            wa[i] = ni.cond_weight;
            for (std::size_t j = 0; j < cb.size(); ++j) {
                const PrefixNode& nj = nu_.node(cb[j]);
                if (ni.value == nj.value)
                    cost.at(i, j) = dp_.value_equal(ca[i], cb[j], depth + 1);
                else
                    cost.at(i, j) =
                        ni.prefix_norm + ni.m_future + nj.prefix_norm + nj.m_future + 1.0;
            }
        }
        for (std::size_t j = 0; j < cb.size(); ++j) wb[j] = nu_.node(cb[j]).cond_weight;
        const OtSolution stage = solve_ot(cost, wa, wb);
        for (std::size_t i = 0; i < ca.size(); ++i) {
            for (std::size_t j = 0; j < cb.size(); ++j) {
                const double m = mass * stage.coupling.at(i, j);
                if (m <= 1e-15) continue;
                if (mu_.node(ca[i]).value == nu_.node(cb[j]).value)
                    descend_equal(ca[i], cb[j], depth + 1, m);
                else
                    spread_product(ca[i], cb[j], m);
            }
        }
    }

    const PrefixTree& mu_;
    const PrefixTree& nu_;
    const DiscretePathMeasure& mu_m_;
    const DiscretePathMeasure& nu_m_;
    Av1Dp dp_;
    Coupling plan_;
};

}  // namespace detail

/// One optimal bi-causal coupling for AV1, product-coupled after splits.
inline Coupling av1_coupling(const DiscretePathMeasure& mu, const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "av1");
    if (mu.T() >= 64) throw std::invalid_argument("av1: horizon too large");
    const PrefixTree ta = disintegrate(mu);
    const PrefixTree tb = disintegrate(nu);
    return detail::Av1CouplingAssembler(ta, tb, mu, nu).assemble();
}

// ============================================================================
// Metric domination report
// ============================================================================

struct DominationReport {
    double alpha = 0.0;       // max of both linear conditional moment coefficients
    double constant = 0.0;    // (3 + 4 alpha)^T - 1
    double tv1 = 0.0;
    double av1 = 0.0;
    double aw1 = 0.0;
    bool aw_le_av = false;
    bool av_le_const_tv = false;

    bool chain_holds() const { return aw_le_av && av_le_const_tv; }
};

inline DominationReport domination_check(const DiscretePathMeasure& mu,
                                         const DiscretePathMeasure& nu) {
    detail::require_same_shape(mu, nu, "domination_check");
    DominationReport r;
    r.alpha = std::max(linear_moment_coefficient(disintegrate(mu)),
                       linear_moment_coefficient(disintegrate(nu)));
    r.constant = std::pow(3.0 + 4.0 * r.alpha, mu.T()) - 1.0;
    r.tv1 = tv1_closed_form(mu, nu);
    r.av1 = av1(mu, nu);
    r.aw1 = aw1_value(mu, nu);
    r.aw_le_av = r.aw1 <= r.av1 + 1e-9;
    r.av_le_const_tv = r.av1 <= r.constant * r.tv1 + 1e-9;
    return r;
}

// ============================================================================
// Mixture convexity check
// ============================================================================

struct ConvexityCheck {
    double lhs = 0.0;        // AW1(mu, uniform mixture of the parts)
    double rhs = 0.0;        // average of AW1(mu, part_m)
    bool disjoint = false;   // parts verified pairwise prefix-disjoint
};

inline DiscretePathMeasure uniform_mixture(const std::vector<DiscretePathMeasure>& parts) {
    if (parts.empty()) throw std::invalid_argument("uniform_mixture: no parts");
    std::vector<Atom> atoms;
    const double scale = 1.0 / static_cast<double>(parts.size());
    for (const auto& p : parts)
        for (const Atom& a : p.atoms()) atoms.push_back({a.path, a.weight * scale});
    return DiscretePathMeasure::from_atoms(parts[0].d(), parts[0].T(), std::move(atoms));
}

/// Convexity of AW1 in its second argument holds when the parts are
/// prefix-disjoint: no two parts share a stage-one value (which makes all
/// longer prefixes disjoint too, so every prefix identifies its part and
/// the bi-causal couplings decouple). Disjoint full paths alone are NOT
/// enough — the nonconvexity family has path-disjoint parts with shared
/// stage-one values and violates the inequality. With overlapping prefixes
/// the numbers are still returned but carry no guarantee.
inline ConvexityCheck mixture_convexity_check(const DiscretePathMeasure& mu,
                                              const std::vector<DiscretePathMeasure>& parts) {
    if (parts.empty()) throw std::invalid_argument("mixture_convexity_check: no parts");
    for (const auto& p : parts) detail::require_same_shape(mu, p, "mixture_convexity_check");

    ConvexityCheck r;
    r.disjoint = true;
    std::vector<std::vector<std::vector<double>>> stage1(parts.size());
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const PrefixTree t = disintegrate(parts[p]);
        for (int c : t.node(t.root()).children) stage1[p].push_back(t.node(c).value);
    }
    for (std::size_t a = 0; a < parts.size() && r.disjoint; ++a)
        for (std::size_t b = a + 1; b < parts.size() && r.disjoint; ++b)
            for (const auto& va : stage1[a])
                for (const auto& vb : stage1[b])
                    if (va == vb) {
                        r.disjoint = false;
                        break;
                    }

    const PrefixTree mu_tree = disintegrate(mu);
    r.lhs = aw1_value(mu_tree, disintegrate(uniform_mixture(parts)));
    double total = 0.0;
    for (const auto& p : parts) total += aw1_value(mu_tree, disintegrate(p));
    r.rhs = total / static_cast<double>(parts.size());
    return r;
}

}  // namespace aot
