#pragma once

// Numerical integration used throughout the library: a globally adaptive
// Gauss-Kronrod (7/15) integrator and a fixed-step composite Gauss-Legendre
// rule. Both are templated on the integrand's value type so complex-valued
// integrands work unchanged.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cgp/errors.hpp"

namespace cgp::quad {

template <typename T>
struct QuadResult {
  T value{};
  double abs_err = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

struct AdaptiveOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  std::size_t max_intervals = 4000;
};

namespace detail {

// Kronrod 15-point abscissae on [-1, 1]; odd indices are the Gauss 7 nodes.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss 7-point weights for kronrod_x[1], [3], [5], [7].
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Panel {
  double a;
  double b;
  T value;
  double err;
  bool operator<(const Panel& other) const { return err < other.err; }
};

template <typename T, typename F>
Panel<T> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kronrod_w[7];
  T gauss = fc * gauss_w[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kronrod_x[j];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += sum * kronrod_w[j];
    if (j % 2 == 1) gauss += sum * gauss_w[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over the union of the
/// intervals [breaks[i], breaks[i+1]]. The breakpoints must be
/// non-decreasing; empty intervals are skipped. The error estimate is the
/// sum over panels of |K15 - G7|. Throws convergence_error when the
/// tolerance is not met within max_intervals panels.
template <typename F>
auto integrate_adaptive(F&& f, std::span<const double> breaks,
                        const AdaptiveOptions& opts = {})
    -> QuadResult<std::decay_t<decltype(f(0.0))>> {
  using T = std::decay_t<decltype(f(0.0))>;
  if (breaks.size() < 2) throw domain_error("integrate_adaptive: need at least two breakpoints");
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (!(breaks[i] >= breaks[i - 1]))
      throw domain_error("integrate_adaptive: breakpoints must be non-decreasing");
  }

  std::priority_queue<detail::Panel<T>> heap;
  T total{};
  double total_err = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    if (breaks[i] == breaks[i - 1]) continue;
    auto p = detail::gk15<T>(f, breaks[i - 1], breaks[i]);
    evals += 15;
    total += p.value;
    total_err += p.err;
    heap.push(p);
  }
  if (heap.empty()) return {T{}, 0.0, 0, 0};

  auto tolerance = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

  while (total_err > tolerance()) {
    if (heap.size() >= opts.max_intervals) {
      throw convergence_error("adaptive quadrature did not converge: estimated error " +
                              std::to_string(total_err) + " after " +
                              std::to_string(heap.size()) + " panels");
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw convergence_error("adaptive quadrature: panel width reached machine resolution");
    }
    heap.pop();
    auto left = detail::gk15<T>(f, worst.a, mid);
    auto right = detail::gk15<T>(f, mid, worst.b);
    evals += 30;
    total += (left.value + right.value) - worst.value;
    total_err += (left.err + right.err) - worst.err;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from the panels to shed the drift of the running updates.
  T resum{};
  double err_resum = 0.0;
  const std::size_t panels = heap.size();
  while (!heap.empty()) {
    resum += heap.top().value;
    err_resum += heap.top().err;
    heap.pop();
  }
  return {resum, err_resum, evals, panels};
}

template <typename F>
auto integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opts = {}) {
  const std::array<double, 2> br{a, b};
  return integrate_adaptive(std::forward<F>(f), std::span<const double>(br), opts);
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw domain_error("gauss_legendre: order must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * z * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Composite Gauss-Legendre rule: [a, b] is cut into ceil((b-a)/step) equal
/// panels, each integrated with `rule`.
template <typename F>
auto integrate_composite(F&& f, double a, double b, double step, const GaussLegendreRule& rule)
    -> std::decay_t<decltype(f(0.0))> {
  using T = std::decay_t<decltype(f(0.0))>;
  if (!(step > 0.0)) throw domain_error("integrate_composite: step must be positive");
  if (b == a) return T{};
  const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / step)));
  const double h = (b - a) / static_cast<double>(panels);
  T total{};
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double center = lo + 0.5 * h;
    T panel{};
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      panel += f(center + 0.5 * h * rule.nodes[k]) * rule.weights[k];
    }
    total += panel * (0.5 * h);
  }
  return total;
}

}  // namespace cgp::quad
