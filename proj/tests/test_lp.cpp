// SPDX-License-Identifier: MIT
#include <catch2/catch_amalgamated.hpp>

#include "aot/lp.hpp"
#include "aot/rng.hpp"

using namespace aot;
using Catch::Approx;

TEST_CASE("simplex solves a textbook instance") {
    // min -x1 - 2x2  s.t.  x1 + x2 + s1 = 4,  x1 + 3x2 + s2 = 6
    std::vector<std::vector<double>> A = {{1, 1, 1, 0}, {1, 3, 0, 1}};
    std::vector<double> b = {4, 6};
    std::vector<double> c = {-1, -2, 0, 0};
    auto r = lp_solve_eq(A, b, c);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == Approx(-5.0));  // x = (3, 1)
    CHECK(r.x[0] == Approx(3.0));
    CHECK(r.x[1] == Approx(1.0));
}

TEST_CASE("simplex detects infeasibility") {
    // x1 = 1 and x1 = 2 cannot both hold
    std::vector<std::vector<double>> A = {{1}, {1}};
    std::vector<double> b = {1, 2};
    std::vector<double> c = {1};
    CHECK(lp_solve_eq(A, b, c).status == LpStatus::Infeasible);
}

TEST_CASE("simplex detects unboundedness") {
    // min -x1 s.t. x1 - x2 = 0: both can grow without bound
    std::vector<std::vector<double>> A = {{1, -1}};
    std::vector<double> b = {0};
    std::vector<double> c = {-1, 0};
    CHECK(lp_solve_eq(A, b, c).status == LpStatus::Unbounded);
}

TEST_CASE("simplex tolerates redundant equality rows") {
    std::vector<std::vector<double>> A = {{1, 1}, {2, 2}, {1, 0}};
    std::vector<double> b = {1, 2, 0.25};
    std::vector<double> c = {1, 3};
    auto r = lp_solve_eq(A, b, c);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x[0] == Approx(0.25));
    CHECK(r.x[1] == Approx(0.75));
    CHECK(r.value == Approx(0.25 + 3 * 0.75));
}

TEST_CASE("random feasible instances satisfy constraints at the optimum") {
    SeededSampler s(17, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t m = 2 + s.next_u64() % 3;
        const std::size_t n = m + 1 + s.next_u64() % 4;
        std::vector<std::vector<double>> A(m, std::vector<double>(n));
        for (auto& row : A)
            for (double& v : row) v = s.next_normal();
        // pick a positive feasible point so the instance is feasible
        std::vector<double> x0(n);
        for (double& v : x0) v = 0.1 + s.next_uniform();
        std::vector<double> b(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) b[i] += A[i][j] * x0[j];
        std::vector<double> c(n);
        for (double& v : c) v = 0.5 + s.next_uniform();  // positive costs keep it bounded

        auto r = lp_solve_eq(A, b, c);
        REQUIRE(r.status == LpStatus::Optimal);
        for (std::size_t i = 0; i < m; ++i) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) lhs += A[i][j] * r.x[j];
            CHECK(lhs == Approx(b[i]).margin(1e-7));
        }
        double manual = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(r.x[j] >= -1e-9);
            manual += c[j] * r.x[j];
        }
        CHECK(r.value == Approx(manual).margin(1e-9));
        double at_x0 = 0.0;
        for (std::size_t j = 0; j < n; ++j) at_x0 += c[j] * x0[j];
        CHECK(r.value <= at_x0 + 1e-9);
    }
}
