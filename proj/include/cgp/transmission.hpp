#pragma once

// Asymptotic transmission of the packet through the barrier, in terms of
//   A = (Z / p0)^2            (barrier strength against mean momentum),
//   B = sigma_p(0) / p0^2     (momentum spread against mean momentum):
//
//   T(A,B) = (2 pi B)^{-1/2} int_{-inf}^{1} exp(-y^2 / 2B) (1-y)^2 / ((1-y)^2 + A) dy.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <string_view>
#include <thread>
#include <vector>

#include "cgp/errors.hpp"
#include "cgp/gaussian_packet.hpp"
#include "cgp/quadrature.hpp"

namespace cgp {

struct DimensionlessPoint {
  double A = 0.0;
  double B = 1.0;
};

struct TransmissionResult {
  double value = 0.0;
  double abs_err = 0.0;
};

inline constexpr double default_rel_tol = 1e-10;

inline void validate(const DimensionlessPoint& pt) {
  detail::require(std::isfinite(pt.A) && pt.A >= 0.0, "A must be non-negative");
  detail::require(std::isfinite(pt.B) && pt.B > 0.0, "B must be positive");
}

/// Plane-wave transmission 1 / (1 + A).
inline double plane_wave_T(double A) {
  detail::require(std::isfinite(A) && A >= 0.0, "A must be non-negative");
  return 1.0 / (1.0 + A);
}

inline DimensionlessPoint point_from_physical(const PacketSpec& spec, const BarrierSpec& barrier) {
  validate(spec);
  validate(barrier);
  const double ratio = barrier.Z / spec.p0;
  const double sp = spec.s * spec.p0;
  return {ratio * ratio, (1.0 + spec.rho * spec.rho) / (2.0 * sp * sp)};
}

namespace detail {

inline void validate_rel_tol(double rel_tol) {
  require(rel_tol >= 1e-13 && rel_tol <= 1e-3, "rel_tol must lie in [1e-13, 1e-3]");
}

// d^2 / (d^2 + A), with the A = 0 limit taken as 1.
inline double barrier_fraction(double d, double A) {
  const double d2 = d * d;
  const double den = d2 + A;
  return den > 0.0 ? d2 / den : 1.0;
}

inline std::vector<double> sorted_breaks(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out{lo, hi};
  for (double p : pts) {
    if (p > lo && p < hi) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline constexpr double gaussian_cut = 12.0;  // standard deviations kept

inline TransmissionResult finish(const quad::QuadResult<double>& r) {
  return {std::clamp(r.value, 0.0, 1.0), r.abs_err};
}

}  // namespace detail

/// T(A,B) by adaptive quadrature in the standardized variable u = y / sqrt(B).
inline TransmissionResult transmission_T(const DimensionlessPoint& pt,
                                         double rel_tol = default_rel_tol) {
  validate(pt);
  detail::validate_rel_tol(rel_tol);
  const double sb = std::sqrt(pt.B);
  const double u_top = 1.0 / sb;  // y = 1
  const double lo = -detail::gaussian_cut;
  const double hi = std::min(u_top, detail::gaussian_cut);
  const double dip = std::sqrt(pt.A) / sb;  // width of the barrier dip near y = 1, in u
  const auto breaks = detail::sorted_breaks({0.0, u_top - dip, u_top - 10.0 * dip}, lo, hi);

  auto integrand = [&](double u) {
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return phi * detail::barrier_fraction(1.0 - sb * u, pt.A);
  };
  quad::AdaptiveOptions opts;
  opts.rel_tol = rel_tol;
  return detail::finish(quad::integrate_adaptive(integrand, breaks, opts));
}

/// The same quantity written as a momentum average: with q = p / p0,
///   T = int_{-inf}^{0} N(q; -1, B) q^2 / (q^2 + A) dq,
/// integrated directly in q.
inline TransmissionResult momentum_average_T(const DimensionlessPoint& pt,
                                             double rel_tol = default_rel_tol) {
  validate(pt);
  detail::validate_rel_tol(rel_tol);
  const double sb = std::sqrt(pt.B);
  const double lo = -1.0 - detail::gaussian_cut * sb;
  const double hi = std::min(0.0, -1.0 + detail::gaussian_cut * sb);
  const double root_a = std::sqrt(pt.A);
  const auto breaks = detail::sorted_breaks({-1.0, -root_a, -10.0 * root_a}, lo, hi);

  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * pt.B);
  auto integrand = [&](double q) {
    const double dq = q + 1.0;
    return norm * std::exp(-dq * dq / (2.0 * pt.B)) * detail::barrier_fraction(q, pt.A);
  };
  quad::AdaptiveOptions opts;
  opts.rel_tol = rel_tol;
  return detail::finish(quad::integrate_adaptive(integrand, breaks, opts));
}

/// Interpolation 1/2 (1 + A/(1+B))^{-1} erfc(-1/sqrt(2B)).
inline double interpolation_Tapr(const DimensionlessPoint& pt) {
  validate(pt);
  return 0.5 / (1.0 + pt.A / (1.0 + pt.B)) * std::erfc(-1.0 / std::sqrt(2.0 * pt.B));
}

enum class Regime { plane_wave, intermediate, saturated, general };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::plane_wave: return "PLANE_WAVE";
    case Regime::intermediate: return "INTERMEDIATE";
    case Regime::saturated: return "SATURATED";
    case Regime::general: return "GENERAL";
  }
  return "GENERAL";
}

struct RegimeClassification {
  Regime regime = Regime::general;
  std::optional<double> prediction;
};

/// PLANE_WAVE (B <= 0.1) predicts 1/(1+A); INTERMEDIATE (10 <= B <= A/10)
/// predicts B/(2A); SATURATED (B >= max(100, 100A)) predicts 1/2.
inline RegimeClassification classify_regime(const DimensionlessPoint& pt) {
  validate(pt);
  if (pt.B <= 0.1) return {Regime::plane_wave, plane_wave_T(pt.A)};
  if (pt.B >= 10.0 && pt.B <= pt.A / 10.0) return {Regime::intermediate, pt.B / (2.0 * pt.A)};
  if (pt.B >= std::max(100.0, 100.0 * pt.A)) return {Regime::saturated, 0.5};
  return {Regime::general, std::nullopt};
}

struct SweepSpec {
  std::vector<double> A_values{0.25, 1.0, 4.0, 25.0};
  double B_lo = 1e-3;
  double B_hi = 1e2;
  std::size_t n_points = 60;
  bool log_spacing = true;
  double rel_tol = default_rel_tol;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
  double A;
  double B;
  double T;
  double T_apr;
  double ratio;
  double abs_err;
};

/// B grid of a sweep, ascending.
inline std::vector<double> sweep_b_values(const SweepSpec& spec) {
  detail::require(spec.B_lo > 0.0, "sweep: B range must be positive");
  detail::require(spec.B_hi > spec.B_lo, "sweep: B_hi must exceed B_lo");
  detail::require(spec.n_points >= 2, "sweep: need at least two points");
  std::vector<double> b(spec.n_points);
  const double last = static_cast<double>(spec.n_points - 1);
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const double f = static_cast<double>(i) / last;
    b[i] = spec.log_spacing
               ? std::exp(std::log(spec.B_lo) + f * (std::log(spec.B_hi) - std::log(spec.B_lo)))
               : spec.B_lo + f * (spec.B_hi - spec.B_lo);
  }
  b.front() = spec.B_lo;
  b.back() = spec.B_hi;
  return b;
}

/// Rows in A-major, B-ascending order regardless of worker scheduling.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  detail::require(!spec.A_values.empty(), "sweep: need at least one A value");
  for (double a : spec.A_values) {
    detail::require(std::isfinite(a) && a >= 0.0, "sweep: A values must be non-negative");
  }
  detail::validate_rel_tol(spec.rel_tol);
  const auto b_values = sweep_b_values(spec);

  std::vector<SweepRow> rows(spec.A_values.size() * b_values.size());
  for (std::size_t i = 0; i < spec.A_values.size(); ++i) {
    for (std::size_t j = 0; j < b_values.size(); ++j) {
      rows[i * b_values.size() + j] = {spec.A_values[i], b_values[j], 0.0, 0.0, 0.0, 0.0};
    }
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      try {
        auto& row = rows[k];
        const DimensionlessPoint pt{row.A, row.B};
        const auto t = transmission_T(pt, spec.rel_tol);
        row.T = t.value;
        row.abs_err = t.abs_err;
        row.T_apr = interpolation_Tapr(pt);
        row.ratio = row.T / row.T_apr;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  unsigned n_threads = spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency();
  n_threads = std::clamp<unsigned>(n_threads, 1u, 64u);
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace cgp
