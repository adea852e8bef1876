// SPDX-License-Identifier: MIT
//
// Dense two-phase primal simplex for small equality-form LPs:
//
//     minimize c.x   subject to  A x = b,  x >= 0.
//
// Bland's rule throughout, so the method terminates even on the highly
// degenerate bases that bi-causality constraints produce. Intentionally
// simple and slow; it serves as an exact correctness witness, not as the
// production transport solver.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace aot {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    double value = 0.0;
    std::vector<double> x;
};

class SimplexSolver {
public:
    static constexpr double kPivotTol = 1e-11;
    static constexpr double kCostTol = 1e-9;

    static LpResult solve(std::vector<std::vector<double>> A, std::vector<double> b,
                          const std::vector<double>& c) {
        const std::size_t m = A.size();
        const std::size_t n = c.size();
        for (auto& row : A)
            if (row.size() != n) throw std::invalid_argument("lp: row size mismatch");
        if (b.size() != m) throw std::invalid_argument("lp: rhs size mismatch");

        for (std::size_t i = 0; i < m; ++i) {
            if (b[i] < 0.0) {
                b[i] = -b[i];
                for (double& v : A[i]) v = -v;
            }
        }

        // Tableau with one artificial per row; artificials form the basis.
        SimplexSolver s;
        s.m_ = m;
        s.n_ = n;
        s.tab_.assign(m, std::vector<double>(n + m + 1, 0.0));
        s.basis_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) s.tab_[i][j] = A[i][j];
            s.tab_[i][n + i] = 1.0;
            s.tab_[i][n + m] = b[i];
            s.basis_[i] = n + i;
        }

        // Phase 1: minimize the artificial mass.
        std::vector<double> phase1(n + m, 0.0);
        for (std::size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
        if (!s.run(phase1, /*allow_artificial=*/true)) return {LpStatus::Unbounded, 0.0, {}};
        if (s.objective(phase1) > 1e-7) return {LpStatus::Infeasible, 0.0, {}};
        s.evict_artificials();

        // Phase 2: the real objective; artificial columns may not re-enter.
        std::vector<double> phase2(n + m, 0.0);
        for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
        if (!s.run(phase2, /*allow_artificial=*/false)) return {LpStatus::Unbounded, 0.0, {}};

        LpResult r;
        r.status = LpStatus::Optimal;
        r.x.assign(n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            if (s.basis_[i] < n) r.x[s.basis_[i]] = s.tab_[i][n + m];
        r.value = 0.0;
        for (std::size_t j = 0; j < n; ++j) r.value += c[j] * r.x[j];
        return r;
    }

private:
    // Runs Bland-rule simplex to optimality for the given cost vector.
    // Returns false when unbounded.
    bool run(const std::vector<double>& cost, bool allow_artificial) {
        const std::size_t cols = n_ + m_;
        const std::size_t max_pivots = 200 * (m_ + cols) + 20000;
        std::size_t pivots = 0;
        while (true) {
            if (++pivots > max_pivots) throw std::runtime_error("lp: pivot limit hit");
            // Simplex multipliers via the basic costs (tableau is canonical,
            // so reduced cost_j = c_j - sum_i c_basis[i] * tab[i][j]).
            std::size_t enter = cols;
            for (std::size_t j = 0; j < cols; ++j) {
                if (!allow_artificial && j >= n_) break;
                if (is_basic(j)) continue;
                double red = cost[j];
                for (std::size_t i = 0; i < m_; ++i) red -= cost[basis_[i]] * tab_[i][j];
                if (red < -kCostTol) {
                    enter = j;
                    break;  // Bland: smallest improving index
                }
            }
            if (enter == cols) return true;

            std::size_t leave = m_;
            double best_ratio = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (tab_[i][enter] > kPivotTol) {
                    const double ratio = tab_[i][n_ + m_] / tab_[i][enter];
                    if (leave == m_ || ratio < best_ratio - 1e-15 ||
                        (std::abs(ratio - best_ratio) <= 1e-15 && basis_[i] < basis_[leave])) {
                        leave = i;
                        best_ratio = ratio;
                    }
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
    }

    double objective(const std::vector<double>& cost) const {
        double v = 0.0;
        for (std::size_t i = 0; i < m_; ++i) v += cost[basis_[i]] * tab_[i][n_ + m_];
        return v;
    }

    bool is_basic(std::size_t col) const {
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] == col) return true;
        return false;
    }

    // Pivot artificial basics out where a structural pivot exists; rows
    // that admit none are redundant and stay parked at zero.
    void evict_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (std::abs(tab_[i][j]) > 1e-9 && !is_basic(j)) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = tab_[row][col];
        for (double& v : tab_[row]) v /= p;
        tab_[row][col] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = tab_[i][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_ + m_; ++j) tab_[i][j] -= f * tab_[row][j];
            tab_[i][col] = 0.0;
        }
        basis_[row] = col;
    }

    std::size_t m_ = 0, n_ = 0;
    std::vector<std::vector<double>> tab_;
    std::vector<std::size_t> basis_;
};

inline LpResult lp_solve_eq(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                            const std::vector<double>& c) {
    return SimplexSolver::solve(A, b, c);
}

}  // namespace aot
