// SPDX-License-Identifier: MIT
//
// Canonical small instances with known exact distance values, shared by the
// verification command and the test suites. All are two-stage scalar
// families parameterized by eps in (0, 1).
#pragma once

#include <stdexcept>

#include "aot/path_measure.hpp"

namespace aot::examples {

namespace detail {
inline void require_unit_interval(double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("example families need eps in (0, 1)");
}
}  // namespace detail

/// Two models that are W1-close but far apart in any adapted sense: mu
/// reveals nothing at stage one, nu reveals everything. W1 = eps while the
/// nested distance is 1 + eps.
struct ConditionalGapPair {
    DiscretePathMeasure mu, nu;
};

inline ConditionalGapPair conditional_gap_pair(double eps) {
    detail::require_unit_interval(eps);
    DiscretePathMeasure mu = DiscretePathMeasure::from_atoms(
        1, 2, {{Path(1, 2, {0.0, 1.0}), 0.5}, {Path(1, 2, {0.0, -1.0}), 0.5}});
    DiscretePathMeasure nu = DiscretePathMeasure::from_atoms(
        1, 2, {{Path(1, 2, {eps, 1.0}), 0.5}, {Path(1, 2, {-eps, -1.0}), 0.5}});
    return {std::move(mu), std::move(nu)};
}

/// A pair whose conditional means blow up like 1/eps: TV1 stays at 2 eps^2
/// while the adapted total variation is of order eps, so the ratio diverges
/// and no moment-only Lipschitz constant can dominate it.
struct TailBlowupPair {
    DiscretePathMeasure mu, nu;
};

inline TailBlowupPair tail_blowup_pair(double eps) {
    detail::require_unit_interval(eps);
    const double tail = 1.0 / eps;
    DiscretePathMeasure mu = DiscretePathMeasure::from_atoms(
        1, 2,
        {{Path(1, 2, {1.0, tail}), eps * (1.0 - eps)},
         {Path(1, 2, {1.0, 0.0}), eps * eps},
         {Path(1, 2, {0.0, 0.0}), 1.0 - eps}});
    DiscretePathMeasure nu = DiscretePathMeasure::from_atoms(
        1, 2,
        {{Path(1, 2, {1.0, tail}), eps * (1.0 - eps)},
         {Path(1, 2, {0.0, 0.0}), 1.0 - eps + eps * eps}});
    return {std::move(mu), std::move(nu)};
}

/// Mixture family demonstrating that the nested distance is not convex in
/// its second argument when part supports overlap: the distance to the
/// half/half mixture of nu1 and nu2 exceeds the average of the distances.
struct NonconvexityFamily {
    DiscretePathMeasure mu, nu1, nu2, mix;
};

inline NonconvexityFamily nonconvexity_family(double eps) {
    detail::require_unit_interval(eps);
    DiscretePathMeasure mu = DiscretePathMeasure::from_atoms(
        1, 2, {{Path(1, 2, {eps, 1.0}), 0.5}, {Path(1, 2, {-eps, -1.0}), 0.5}});
    DiscretePathMeasure nu2 = DiscretePathMeasure::from_atoms(
        1, 2, {{Path(1, 2, {-eps, 1.0}), 0.5}, {Path(1, 2, {eps, -1.0}), 0.5}});
    DiscretePathMeasure mix = DiscretePathMeasure::from_atoms(
        1, 2,
        {{Path(1, 2, {eps, 1.0}), 0.25},
         {Path(1, 2, {-eps, -1.0}), 0.25},
         {Path(1, 2, {-eps, 1.0}), 0.25},
         {Path(1, 2, {eps, -1.0}), 0.25}});
    return {mu, mu, std::move(nu2), std::move(mix)};
}

/// Exact adapted weighted-TV value of tail_blowup_pair(eps), certified by
/// the bi-causal LP oracle: the optimum keeps the shared tail atom
/// diagonal, paying eps(3 + 1/eps) conditionally on the matched stage-one
/// pair and routing the leftover eps^2 across, which totals
/// 2 eps + 3 eps^2 - 3 eps^3.
inline double tail_blowup_av1(double eps) {
    return 2.0 * eps + 3.0 * eps * eps - 3.0 * eps * eps * eps;
}

}  // namespace aot::examples
