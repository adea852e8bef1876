// SPDX-License-Identifier: MIT
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "aot/gaussian.hpp"
#include "aot/numerics.hpp"
#include "aot/rng.hpp"

using namespace aot;
using Catch::Approx;

namespace {

GaussianMixture two_bump_1d2t(double scale = 0.4) {
    return GaussianMixture(1, 2, {{0.5, {-1.0, -1.0}, scale}, {0.5, {1.0, 1.0}, scale}});
}

}  // namespace

TEST_CASE("normal quantile: known values and cdf round-trip") {
    CHECK(normal_quantile(0.5) == Approx(0.0).margin(1e-15));
    CHECK(normal_quantile(0.975) == Approx(1.959963984540054).margin(1e-12));
    CHECK(normal_quantile(0.025) == Approx(-1.959963984540054).margin(1e-12));
    CHECK(normal_quantile(1e-10) == Approx(-6.361340902404056).margin(1e-9));
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
        CHECK(normal_cdf(normal_quantile(p)) == Approx(p).margin(1e-12));
    }
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("kernel density integrates to one (quadrature, dims 1..3)") {
    for (double sigma : {0.6, 1.2}) {
        // 1d and 2d: tensor Simpson
        auto f1 = [&](double x) { return normal_pdf_k(x * x, sigma, 1); };
        CHECK(simpson(f1, -10 * sigma, 10 * sigma, 4000) == Approx(1.0).margin(1e-8));

        auto f2_outer = [&](double x) {
            auto inner = [&](double y) { return normal_pdf_k(x * x + y * y, sigma, 2); };
            return simpson(inner, -9 * sigma, 9 * sigma, 600);
        };
        CHECK(simpson(f2_outer, -9 * sigma, 9 * sigma, 600) == Approx(1.0).margin(1e-6));

        // 3d: radial quadrature, 4 pi int r^2 phi(r) dr
        auto f3 = [&](double r) { return 4.0 * kPi * r * r * normal_pdf_k(r * r, sigma, 3); };
        CHECK(simpson(f3, 0.0, 12 * sigma, 6000) == Approx(1.0).margin(1e-8));
    }
    CHECK_THROWS(GaussianKernel(0.0, 2));
}

TEST_CASE("mixture density integrates to one (2d quadrature)") {
    auto g = two_bump_1d2t(0.5);
    auto outer = [&](double x) {
        auto inner = [&](double y) { return g.density({x, y}); };
        return simpson(inner, -6.0, 6.0, 500);
    };
    CHECK(simpson(outer, -6.0, 6.0, 500) == Approx(1.0).margin(1e-4));
}

TEST_CASE("sample_gaussian: deterministic, centered, right variance") {
    GaussianKernel k(0.8, 2);
    SeededSampler a(4242, 7), b(4242, 7);
    auto draws_a = sample_gaussian(a, k, 50);
    auto draws_b = sample_gaussian(b, k, 50);
    CHECK(draws_a == draws_b);

    SeededSampler s(4242, 8);
    const std::size_t n = 100000;
    auto draws = sample_gaussian(s, k, n);
    double mean[2] = {0, 0}, var[2] = {0, 0};
    for (const auto& v : draws) {
        mean[0] += v[0];
        mean[1] += v[1];
    }
    mean[0] /= n;
    mean[1] /= n;
    for (const auto& v : draws) {
        var[0] += (v[0] - mean[0]) * (v[0] - mean[0]);
        var[1] += (v[1] - mean[1]) * (v[1] - mean[1]);
    }
    var[0] /= n;
    var[1] /= n;
    const double band = 5.0 * k.sigma / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean[0]) < band);
    CHECK(std::abs(mean[1]) < band);
    CHECK(var[0] == Approx(k.sigma * k.sigma).epsilon(0.10));
    CHECK(var[1] == Approx(k.sigma * k.sigma).epsilon(0.10));
}

TEST_CASE("mixture_sample: degenerate component, frequencies, mean") {
    GaussianMixture point(1, 2, {{1.0, {0.3, -0.7}, 0.0}});
    SeededSampler s(5, 5);
    for (const Path& p : mixture_sample(s, point, 20)) {
        CHECK(p.coords[0] == 0.3);
        CHECK(p.coords[1] == -0.7);
    }

    GaussianMixture g(1, 1, {{0.2, {-2.0}, 0.1}, {0.5, {0.0}, 0.1}, {0.3, {2.0}, 0.1}});
    SeededSampler s2(6, 6);
    const std::size_t n = 100000;
    auto draws = mixture_sample(s2, g, n);
    double freq[3] = {0, 0, 0}, mean = 0.0;
    for (const Path& p : draws) {
        const double x = p.coords[0];
        mean += x;
        if (x < -1.0)
            freq[0] += 1;
        else if (x < 1.0)
            freq[1] += 1;
        else
            freq[2] += 1;
    }
    mean /= n;
    const double weights[3] = {0.2, 0.5, 0.3};
    for (int k = 0; k < 3; ++k) {
        const double p = weights[k];
        CHECK(freq[k] / n == Approx(p).margin(3.0 * std::sqrt(p / n)));
    }
    const double expected_mean = 0.2 * -2.0 + 0.5 * 0.0 + 0.3 * 2.0;
    CHECK(mean == Approx(expected_mean).margin(5.0 * 1.1 / std::sqrt(static_cast<double>(n))));
}

TEST_CASE("smoothed mixture is the scale-enlarged mixture") {
    auto g = two_bump_1d2t(0.4);
    auto gs = g.smoothed(0.3);
    CHECK(gs.components()[0].scale == Approx(std::sqrt(0.4 * 0.4 + 0.3 * 0.3)));
    CHECK(gs.components()[0].center == g.components()[0].center);
    auto same = g.smoothed(0.0);
    CHECK(same.components()[1].scale == 0.4);
}

TEST_CASE("smoothed conditional density: single component is a Gaussian slice") {
    GaussianMixture g(1, 2, {{1.0, {0.5, -0.25}, 0.3}});
    const double sigma = 0.2;
    const double s = std::sqrt(0.3 * 0.3 + sigma * sigma);
    for (double x2 : {-1.0, 0.0, 0.4}) {
        CHECK(smoothed_conditional_density(g, sigma, {2.0}, {x2}) ==
              Approx(normal_pdf(x2 - (-0.25), s)).margin(1e-12));
    }
    CHECK_THROWS(smoothed_conditional_density(g, 0.0, {2.0}, {0.0}));
    CHECK_THROWS(smoothed_conditional_density(g, -1.0, {2.0}, {0.0}));
}

TEST_CASE("smoothed prefix weights form a probability vector") {
    auto g = two_bump_1d2t();
    for (double x1 : {-2.0, -0.3, 0.0, 0.9, 3.0}) {
        auto alpha = detail::smoothed_prefix_weights(g, 0.25, {x1});
        double total = 0.0;
        for (double a : alpha) {
            CHECK(a >= 0.0);
            total += a;
        }
        CHECK(total == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("conditional density matches the Bayes quotient and normalizes") {
    auto g = two_bump_1d2t(0.35);
    const double sigma = 0.3;
    auto gs = g.smoothed(sigma);
    for (double x1 : {-0.8, 0.1, 1.2}) {
        // quadrature marginal of the smoothed joint at x1
        auto joint = [&](double x2) { return gs.density({x1, x2}); };
        const double marginal = simpson(joint, -8.0, 8.0, 4000);
        for (double x2 : {-1.3, 0.0, 0.7}) {
            const double quotient = gs.density({x1, x2}) / marginal;
            CHECK(smoothed_conditional_density(g, sigma, {x1}, {x2}) ==
                  Approx(quotient).margin(1e-6));
        }
        auto cond = [&](double x2) { return smoothed_conditional_density(g, sigma, {x1}, {x2}); };
        CHECK(simpson(cond, -8.0, 8.0, 4000) == Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("lipschitz diagnostic: constant kernels give zero") {
    GaussianMixture g(1, 2, {{1.0, {0.0, 0.0}, 0.5}});
    CHECK(lipschitz_kernel_estimate(g, 0.3, {{-1.0}, {0.0}, {1.0}}) == Approx(0.0).margin(1e-12));
    // an identical probe pair alone yields no admissible ratio
    CHECK(lipschitz_kernel_estimate(g, 0.3, {{0.5}, {0.5}}) == 0.0);
}

TEST_CASE("lipschitz diagnostic is stable under probe refinement") {
    auto g = two_bump_1d2t(0.4);
    const double sigma = 0.3;
    std::vector<std::vector<double>> coarse, fine;
    for (double x = -0.75; x <= 0.7501; x += 0.1) coarse.push_back({x});
    for (double x = -0.75; x <= 0.7501; x += 0.05) fine.push_back({x});
    const double lc = lipschitz_kernel_estimate(g, sigma, coarse);
    const double lf = lipschitz_kernel_estimate(g, sigma, fine);
    CHECK(lf >= lc - 1e-12);  // finer probes can only reveal more
    CHECK(std::abs(lf - lc) / lf < 0.10);
}

TEST_CASE("sample-level smoothing semigroup (energy distance permutation test)") {
    // X + sigma * eps  vs  direct draws from the smoothed mixture: same law.
    auto g = two_bump_1d2t(0.4);
    const double sigma = 0.35;
    const std::size_t n = 10000;

    SeededSampler sx(31337, 1);
    auto xs = mixture_sample(sx, g, n);
    SeededSampler se(31337, 2);
    std::vector<std::vector<double>> a;
    a.reserve(n);
    for (const Path& p : xs)
        a.push_back({p.coords[0] + sigma * se.next_normal(), p.coords[1] + sigma * se.next_normal()});

    SeededSampler sy(31337, 3);
    auto ys = mixture_sample(sy, g.smoothed(sigma), n);
    std::vector<std::vector<double>> b;
    b.reserve(n);
    for (const Path& p : ys) b.push_back({p.coords[0], p.coords[1]});

    // incomplete U-statistic estimate of the energy distance over sampled
    // pairs; the same pair indices are reused across permutation replicates
    const std::size_t n_pairs = 200000;
    SeededSampler idx(31337, 4);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs(n_pairs);
    for (auto& pr : pairs)
        pr = {static_cast<std::uint32_t>(idx.next_u64() % n),
              static_cast<std::uint32_t>(idx.next_u64() % n)};

    auto dist = [](const std::vector<double>& u, const std::vector<double>& v) {
        const double dx = u[0] - v[0], dy = u[1] - v[1];
        return std::sqrt(dx * dx + dy * dy);
    };
    auto energy = [&](const std::vector<const std::vector<double>*>& ga,
                      const std::vector<const std::vector<double>*>& gb) {
        double ab = 0, aa = 0, bb = 0;
        for (const auto& pr : pairs) {
            ab += dist(*ga[pr.first], *gb[pr.second]);
            aa += dist(*ga[pr.first], *ga[pr.second]);
            bb += dist(*gb[pr.first], *gb[pr.second]);
        }
        return (2 * ab - aa - bb) / static_cast<double>(n_pairs);
    };

    std::vector<const std::vector<double>*> pa, pb, pooled;
    for (const auto& v : a) pa.push_back(&v);
    for (const auto& v : b) pb.push_back(&v);
    pooled = pa;
    pooled.insert(pooled.end(), pb.begin(), pb.end());

    const double observed = energy(pa, pb);

    SeededSampler shuffle_rng(31337, 5);
    std::vector<double> null_stats;
    for (int rep = 0; rep < 100; ++rep) {
        for (std::size_t i = pooled.size() - 1; i > 0; --i)
            std::swap(pooled[i], pooled[shuffle_rng.next_u64() % (i + 1)]);
        std::vector<const std::vector<double>*> ga(pooled.begin(),
                                                   pooled.begin() + static_cast<std::ptrdiff_t>(n));
        std::vector<const std::vector<double>*> gb(pooled.begin() + static_cast<std::ptrdiff_t>(n),
                                                   pooled.end());
        null_stats.push_back(energy(ga, gb));
    }
    std::sort(null_stats.begin(), null_stats.end());
    const double q99 = null_stats[98];
    CHECK(observed < q99);
}

TEST_CASE("mixture json round-trip") {
    auto g = two_bump_1d2t();
    auto back = mixture_from_json(mixture_to_json(g));
    CHECK(back.d() == g.d());
    CHECK(back.T() == g.T());
    REQUIRE(back.components().size() == 2);
    CHECK(back.components()[1].center == g.components()[1].center);
    CHECK_THROWS(GaussianMixture(1, 2, {{0.5, {0.0, 0.0}, 0.1}}));  // mass != 1
}
