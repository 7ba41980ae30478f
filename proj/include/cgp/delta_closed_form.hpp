#pragma once

// Exact evolution of the correlated packet through the barrier Z delta(x):
//
//   psi(x,t) = psi_free(x,t) { 1 - Z sqrt(pi mu / 2 gamma) erfc(D) exp[D^2 +
//              (x + |x|)(i p0 s^2 - gamma x_c) / mu] },
//   D = [Z mu + gamma (|x| + x_c) - i p0 s^2] / sqrt(2 gamma mu),
//
// valid once the tail of psi(x,0) on x < 0 is negligible (x_c >> s).
// erfc(D) exp(D^2) is evaluated as the single call erfcx(D).
//
// Branches: with a = gamma / (2 mu), Re(a) = s^2 / (2 |mu|^2) > 0, so
// sqrt(a) is taken on the principal branch and sqrt(2 gamma mu) is formed as
// 2 mu sqrt(a). The principal sqrt(2 gamma mu) itself flips sign once
// arg(gamma mu) passes pi, which happens for rho < -1 at large t.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "cgp/errors.hpp"
#include "cgp/gaussian_packet.hpp"
#include "cgp/special_functions.hpp"

namespace cgp {

/// Thresholds standing in for "x_c >> s", "Re(D) >> 1" and "t -> infinity".
struct ClosedFormGuards {
  FarFieldGuard farfield{};
  double min_re_d_asymptotic = 5.0;
  double min_travel_ratio = 20.0;  // p0 t >= ratio * x_c for the asymptotic density
};

/// psi sampled on a uniform grid at time t.
struct WavefunctionGrid {
  double t = 0.0;
  double dx = 0.0;
  std::vector<double> x;
  std::vector<cplx> psi;

  [[nodiscard]] std::size_t size() const { return x.size(); }

  /// Trapezoid rule for the integral of |psi|^2 over the grid.
  [[nodiscard]] double norm() const {
    if (psi.size() < 2) return 0.0;
    double sum = 0.5 * (std::norm(psi.front()) + std::norm(psi.back()));
    for (std::size_t i = 1; i + 1 < psi.size(); ++i) sum += std::norm(psi[i]);
    return sum * dx;
  }

  /// Trapezoid rule for the integral of |psi|^2 over x < 0. A node at x = 0
  /// contributes half its weight.
  [[nodiscard]] double norm_left() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      double w = 1.0;
      if (i == 0 || i + 1 == psi.size()) w = 0.5;
      if (x[i] == 0.0) w *= 0.5;
      if (x[i] <= 0.0) sum += w * std::norm(psi[i]);
    }
    return sum * dx;
  }
};

/// Uniform nodes x_min + i dx, i = 0..n-1.
inline std::vector<double> uniform_nodes(double x_min, double x_max, std::size_t n) {
  detail::require(n >= 2, "grid needs at least two points");
  detail::require(x_max > x_min, "grid requires x_max > x_min");
  std::vector<double> x(n);
  const double dx = (x_max - x_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = x_min + dx * static_cast<double>(i);
  x.back() = x_max;
  return x;
}

namespace detail {

inline void validate_closed_form(const PacketSpec& spec, const BarrierSpec& barrier, double t,
                                 const ClosedFormGuards& guards) {
  validate(spec, guards.farfield);
  validate(barrier);
  require(std::isfinite(t) && t >= 0.0, "time must be non-negative");
}

// sqrt(gamma / (2 mu)) on the principal branch (positive real part).
inline cplx sqrt_a(const PacketSpec& spec, double t) {
  return std::sqrt(spec.gamma() / (2.0 * mu_of_t(spec, t)));
}

inline cplx d_parameter_unchecked(const PacketSpec& spec, const BarrierSpec& barrier, double x,
                                  double t) {
  const cplx mu = mu_of_t(spec, t);
  const cplx numerator = barrier.Z * mu + spec.gamma() * (std::abs(x) + spec.x_c) -
                         cplx(0.0, spec.p0 * spec.s * spec.s);
  return numerator / (2.0 * mu * sqrt_a(spec, t));
}

}  // namespace detail

/// D(x,t). Throws validity_error when Re(D) <= 0, which signals parameters
/// outside the regime of the closed-form solution.
inline cplx d_parameter(const PacketSpec& spec, const BarrierSpec& barrier, double x, double t,
                        const ClosedFormGuards& guards = {}) {
  detail::validate_closed_form(spec, barrier, t, guards);
  const cplx d = detail::d_parameter_unchecked(spec, barrier, x, t);
  if (!(d.real() > 0.0)) {
    std::ostringstream msg;
    msg << "Re(D) = " << d.real() << " <= 0 at x = " << x << ", t = " << t
        << ": parameters outside the validity regime of the closed form";
    throw validity_error(msg.str());
  }
  return d;
}

/// psi(x,t) with the barrier present. For Z = 0 this is psi_free exactly.
inline cplx evolved_wavefunction(const PacketSpec& spec, const BarrierSpec& barrier, double x,
                                 double t, const ClosedFormGuards& guards = {}) {
  detail::validate_closed_form(spec, barrier, t, guards);
  const cplx free = free_evolution(spec, x, t);
  if (barrier.Z == 0.0) return free;

  const cplx mu = mu_of_t(spec, t);
  const cplx root_a = detail::sqrt_a(spec, t);
  const cplx d = d_parameter(spec, barrier, x, t, guards);
  const cplx prefactor = barrier.Z * (0.5 * std::sqrt(std::numbers::pi)) / root_a;
  cplx bracket = prefactor * erfcx(d);
  if (x > 0.0) {
    const cplx g = cplx(0.0, spec.p0 * spec.s * spec.s) - spec.gamma() * spec.x_c;
    bracket *= std::exp(2.0 * x * g / mu);
  }
  return free * (1.0 - bracket);
}

/// Result of the large-|D| simplification on x < 0.
struct LeftAsymptote {
  cplx psi;
  cplx d;
  bool reliable;  // Re(D) >= guards.min_re_d_asymptotic
};

/// psi(x<0, t) ~ psi_free * g / (g + mu Z), g = gamma (|x| + x_c) - i p0 s^2.
inline LeftAsymptote asymptotic_left_wavefunction(const PacketSpec& spec,
                                                  const BarrierSpec& barrier, double x, double t,
                                                  const ClosedFormGuards& guards = {}) {
  detail::validate_closed_form(spec, barrier, t, guards);
  detail::require(x < 0.0, "asymptotic_left_wavefunction requires x < 0");
  const cplx mu = mu_of_t(spec, t);
  const cplx g = spec.gamma() * (std::abs(x) + spec.x_c) - cplx(0.0, spec.p0 * spec.s * spec.s);
  const cplx psi = free_evolution(spec, x, t) * (g / (g + mu * barrier.Z));
  const cplx d = detail::d_parameter_unchecked(spec, barrier, x, t);
  return {psi, d, d.real() >= guards.min_re_d_asymptotic};
}

enum class DensityMeasure {
  per_length,  // |psi|^2 in x
  per_y,       // includes the Jacobian dx = t p0 dy
};

/// Large-time density at x = x_c + p0 t (y - 1):
///   [t sqrt(pi (1+rho^2)) / s]^{-1} exp[-(s p0 y)^2 / (1+rho^2)] (1-y)^2 / ((1-y)^2 + A).
/// Requires p0 t >= guards.min_travel_ratio * x_c.
inline double asymptotic_density(const PacketSpec& spec, const BarrierSpec& barrier, double y,
                                 double t, DensityMeasure measure = DensityMeasure::per_length,
                                 const ClosedFormGuards& guards = {}) {
  validate(spec);
  validate(barrier);
  detail::require(std::isfinite(y), "y must be finite");
  detail::require(std::isfinite(t) && spec.p0 * t >= guards.min_travel_ratio * spec.x_c,
                  "asymptotic density requires p0 t >= " +
                      std::to_string(guards.min_travel_ratio) + " x_c");
  const double one_rho2 = 1.0 + spec.rho * spec.rho;
  const double spy = spec.s * spec.p0 * y;
  const double free_density =
      spec.s / (t * std::sqrt(std::numbers::pi * one_rho2)) * std::exp(-spy * spy / one_rho2);
  const double A = (barrier.Z / spec.p0) * (barrier.Z / spec.p0);
  const double d2 = (1.0 - y) * (1.0 - y);
  const double fraction = (d2 + A) > 0.0 ? d2 / (d2 + A) : 1.0;
  const double density = free_density * fraction;
  return measure == DensityMeasure::per_y ? density * t * spec.p0 : density;
}

/// Samples evolved_wavefunction on n uniform points of [x_min, x_max].
inline WavefunctionGrid sample_evolved(const PacketSpec& spec, const BarrierSpec& barrier,
                                       double t, double x_min, double x_max, std::size_t n,
                                       const ClosedFormGuards& guards = {}) {
  WavefunctionGrid grid;
  grid.t = t;
  grid.x = uniform_nodes(x_min, x_max, n);
  grid.dx = (x_max - x_min) / static_cast<double>(n - 1);
  grid.psi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.psi[i] = evolved_wavefunction(spec, barrier, grid.x[i], t, guards);
  }
  return grid;
}

}  // namespace cgp
