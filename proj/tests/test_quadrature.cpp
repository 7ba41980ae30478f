#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cgp/quadrature.hpp"

namespace {

namespace quad = cgp::quad;

TEST(Adaptive, SmoothIntegrals) {
  const auto r = quad::integrate_adaptive([](double x) { return std::exp(-x * x); }, -8.0, 8.0);
  EXPECT_NEAR(r.value, std::sqrt(std::numbers::pi), 1e-14);
  const auto s = quad::integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  EXPECT_NEAR(s.value, 2.0, 1e-14);
}

TEST(Adaptive, ErrorEstimateBoundsTrueError) {
  quad::AdaptiveOptions opts;
  opts.rel_tol = 1e-6;
  const auto r = quad::integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, opts);
  EXPECT_LE(std::abs(r.value - 2.0 / 3.0), r.abs_err);
  EXPECT_LE(r.abs_err, 1e-6);
}

TEST(Adaptive, BreakpointsHelpNarrowFeatures) {
  const double w = 1e-4;
  auto f = [w](double x) { return w / (x * x + w * w); };  // integral atan(1/w) * 2
  const std::vector<double> breaks{-1.0, 0.0, 1.0};
  const auto r = quad::integrate_adaptive(f, breaks);
  EXPECT_NEAR(r.value, 2.0 * std::atan(1.0 / w), 1e-9);
}

TEST(Adaptive, ThrowsWhenBudgetExhausted) {
  quad::AdaptiveOptions opts;
  opts.max_intervals = 3;
  opts.rel_tol = 1e-14;
  auto f = [](double x) { return std::sin(1.0 / x); };
  EXPECT_THROW(quad::integrate_adaptive(f, 1e-4, 1.0, opts), cgp::convergence_error);
}

TEST(GaussLegendre, WeightsAndPolynomialExactness) {
  for (std::size_t n : {2u, 5u, 10u, 20u}) {
    const auto rule = quad::gauss_legendre(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 2.0, 1e-14);
    // x^(2n-2) over [-1,1] is 2/(2n-1)
    const auto deg = static_cast<double>(2 * n - 2);
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) m += rule.weights[k] * std::pow(rule.nodes[k], deg);
    EXPECT_NEAR(m, 2.0 / (deg + 1.0), 1e-14) << n;
  }
}

TEST(Composite, ResolvesOscillation) {
  const auto rule = quad::gauss_legendre(10);
  const double k = 40.0;
  const auto v = quad::integrate_composite([k](double x) { return std::cos(k * x); }, 0.0, 3.0,
                                           0.1, rule);
  EXPECT_NEAR(v, std::sin(3.0 * k) / k, 1e-14);
}

}  // namespace
