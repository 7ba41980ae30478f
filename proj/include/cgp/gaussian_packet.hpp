#pragma once

// The initial correlated Gaussian state, its second moments, and its free
// evolution. Natural units (hbar = m = 1) throughout; see to_natural_units.
//
//   psi(x,0) = (pi s^2)^{-1/4} exp[-gamma (x-x_c)^2 / (2 s^2) - i p0 x],
//   gamma = 1 - i rho,
//
// so <x> = x_c and <p> = -p0 (the packet moves towards the origin).

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "cgp/errors.hpp"
#include "cgp/special_functions.hpp"

namespace cgp {

/// Initial packet parameters: width scale s, correlation parameter rho,
/// mean position x_c and mean-momentum magnitude p0.
struct PacketSpec {
  double s = 1.0;
  double rho = 0.0;
  double x_c = 10.0;
  double p0 = 1.0;

  [[nodiscard]] cplx gamma() const { return {1.0, -rho}; }
  [[nodiscard]] double farfield_ratio() const { return x_c / s; }
};

/// Strength of the repulsive barrier V(x) = Z delta(x). Z = 0 is accepted
/// and means no barrier.
struct BarrierSpec {
  double Z = 1.0;
};

/// Downstream closed forms assume x_c >> s.
struct FarFieldGuard {
  double min_ratio = 8.0;
  bool enforce = true;
};

inline void validate(const PacketSpec& spec) {
  using detail::require;
  require(std::isfinite(spec.s) && spec.s > 0.0, "packet width s must be positive");
  require(std::isfinite(spec.p0) && spec.p0 > 0.0, "mean momentum magnitude p0 must be positive");
  require(std::isfinite(spec.x_c) && spec.x_c > 0.0, "initial position x_c must be positive");
  require(std::isfinite(spec.rho), "correlation parameter rho must be finite");
}

inline void validate(const PacketSpec& spec, const FarFieldGuard& guard) {
  validate(spec);
  if (guard.enforce && spec.farfield_ratio() < guard.min_ratio) {
    throw domain_error("far-field guard: x_c/s = " + std::to_string(spec.farfield_ratio()) +
                       " is below the required " + std::to_string(guard.min_ratio));
  }
}

inline void validate(const BarrierSpec& barrier) {
  detail::require(std::isfinite(barrier.Z) && barrier.Z >= 0.0,
                  "barrier strength Z must be non-negative (repulsive)");
}

/// Second moments of the initial state; sigma_x sigma_p - sigma_xp^2 = 1/4.
struct MomentSet {
  double sigma_x;
  double sigma_p;
  double sigma_xp;
  double r;
};

inline cplx initial_wavefunction(const PacketSpec& spec, double x) {
  validate(spec);
  const double u = x - spec.x_c;
  const double norm = std::pow(std::numbers::pi * spec.s * spec.s, -0.25);
  return norm * std::exp(-spec.gamma() * (u * u / (2.0 * spec.s * spec.s)) -
                         cplx(0.0, spec.p0 * x));
}

inline MomentSet initial_moments(const PacketSpec& spec) {
  validate(spec);
  const double s2 = spec.s * spec.s;
  MomentSet m{};
  m.sigma_x = 0.5 * s2;
  m.sigma_p = (1.0 + spec.rho * spec.rho) / (2.0 * s2);
  m.sigma_xp = 0.5 * spec.rho;
  m.r = m.sigma_xp / std::sqrt(m.sigma_x * m.sigma_p);
  return m;
}

/// r = rho / sqrt(1 + rho^2).
inline double correlation_from_rho(double rho) {
  detail::require(std::isfinite(rho), "rho must be finite");
  return rho / std::hypot(1.0, rho);
}

/// rho = r / sqrt(1 - r^2); requires |r| < 1.
inline double rho_from_correlation(double r) {
  detail::require(std::isfinite(r) && std::abs(r) < 1.0, "correlation r must satisfy |r| < 1");
  return r / std::sqrt((1.0 - r) * (1.0 + r));
}

/// hbar_eff / hbar = 1 / sqrt(1 - r^2).
inline double effective_planck(double r) {
  detail::require(std::isfinite(r) && std::abs(r) < 1.0, "correlation r must satisfy |r| < 1");
  return 1.0 / std::sqrt((1.0 - r) * (1.0 + r));
}

/// mu(t) = s^2 + i gamma t = (s^2 + rho t) + i t.
inline cplx mu_of_t(const PacketSpec& spec, double t) {
  detail::require(t >= 0.0, "time must be non-negative");
  return {spec.s * spec.s + spec.rho * t, t};
}

/// Free-particle evolution of the initial packet:
///   [sqrt(pi) mu/s]^{-1/2} exp[-gamma (x - x_c + p0 t)^2 / (2 mu) - i p0 x - i p0^2 t / 2].
inline cplx free_evolution(const PacketSpec& spec, double x, double t) {
  validate(spec);
  const cplx mu = mu_of_t(spec, t);
  const double v = x - spec.x_c + spec.p0 * t;
  const cplx prefactor = 1.0 / std::sqrt(std::sqrt(std::numbers::pi) * mu / spec.s);
  const cplx exponent = -spec.gamma() * (v * v) / (2.0 * mu) -
                        cplx(0.0, spec.p0 * x + 0.5 * spec.p0 * spec.p0 * t);
  return prefactor * std::exp(exponent);
}

/// Position variance of the free packet at time t:
///   sigma_x(t) = |mu|^2 / (2 s^2) = sigma_x + 2 sigma_xp t + sigma_p t^2.
inline double free_position_variance(const PacketSpec& spec, double t) {
  const cplx mu = mu_of_t(spec, t);
  return std::norm(mu) / (2.0 * spec.s * spec.s);
}

/// A packet and barrier given in physical units together with the mass and
/// Planck constant that define them.
struct PhysicalSetup {
  double mass = 1.0;
  double hbar = 1.0;
  PacketSpec packet;  // s, x_c in length units, p0 in momentum units
  BarrierSpec barrier;
};

struct NaturalSetup {
  PacketSpec packet;
  BarrierSpec barrier;
  double mass;
  double hbar;

  /// Natural time corresponding to a physical time.
  [[nodiscard]] double time(double t_phys) const { return hbar * t_phys / mass; }
};

/// Applies t -> hbar t / m, p -> p / hbar, Z -> m Z / hbar^2; lengths and
/// rho are unchanged.
inline NaturalSetup to_natural_units(const PhysicalSetup& phys) {
  detail::require(std::isfinite(phys.mass) && phys.mass > 0.0, "mass must be positive");
  detail::require(std::isfinite(phys.hbar) && phys.hbar > 0.0, "hbar must be positive");
  NaturalSetup out{phys.packet, phys.barrier, phys.mass, phys.hbar};
  out.packet.p0 = phys.packet.p0 / phys.hbar;
  out.barrier.Z = phys.mass * phys.barrier.Z / (phys.hbar * phys.hbar);
  return out;
}

}  // namespace cgp
