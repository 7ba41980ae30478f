#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "cgp/gaussian_packet.hpp"
#include "cgp/transmission.hpp"

namespace {

using cgp::cplx;
using cgp::PacketSpec;

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

// psi'(x, 0) from the closed expression of psi(x, 0).
cplx initial_derivative(const PacketSpec& p, double x) {
  return (-p.gamma() * (x - p.x_c) / (p.s * p.s) - cplx(0.0, p.p0)) * cgp::initial_wavefunction(p, x);
}

struct Moments {
  double norm, mean_x, mean_p, var_x, var_p, cov;
};

// Second moments of psi(x,0) by quadrature; <p^2> = int |psi'|^2 and
// <xp + px>/2 = Re int conj(psi) x (-i psi').
Moments numeric_moments(const PacketSpec& p) {
  const double lo = p.x_c - 12.0 * p.s;
  const double hi = p.x_c + 12.0 * p.s;
  auto psi = [&](double x) { return cgp::initial_wavefunction(p, x); };
  Moments m{};
  m.norm = integrate([&](double x) { return std::norm(psi(x)); }, lo, hi);
  m.mean_x = integrate([&](double x) { return x * std::norm(psi(x)); }, lo, hi);
  m.mean_p = integrate(
      [&](double x) { return (std::conj(psi(x)) * cplx(0.0, -1.0) * initial_derivative(p, x)).real(); },
      lo, hi);
  // centred on x_c to avoid cancellation
  const double dx = m.mean_x - p.x_c;
  const double x2 = integrate([&](double x) { return (x - p.x_c) * (x - p.x_c) * std::norm(psi(x)); }, lo, hi);
  const double p2 = integrate([&](double x) { return std::norm(initial_derivative(p, x)); }, lo, hi);
  const double xp = integrate(
      [&](double x) {
        return (std::conj(psi(x)) * (x - p.x_c) * cplx(0.0, -1.0) * initial_derivative(p, x)).real();
      },
      lo, hi);
  m.var_x = x2 - dx * dx;
  m.var_p = p2 - m.mean_p * m.mean_p;
  m.cov = xp - dx * m.mean_p;
  return m;
}

TEST(InitialState, NormalizedWithExpectedMeans) {
  const PacketSpec p{1.3, 0.7, 12.0, 1.5};
  const auto m = numeric_moments(p);
  EXPECT_NEAR(m.norm, 1.0, 1e-13);
  EXPECT_NEAR(m.mean_x, p.x_c, 1e-12);
  EXPECT_NEAR(m.mean_p, -p.p0, 1e-12);
}

TEST(InitialState, AnalyticMomentsMatchQuadrature) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(0.3, 3.0), rho(-3.0, 3.0), p0(0.2, 5.0);
  for (int i = 0; i < 25; ++i) {
    const PacketSpec p{s(rng), rho(rng), 40.0, p0(rng)};
    const auto num = numeric_moments(p);
    const auto m = cgp::initial_moments(p);
    EXPECT_NEAR(num.var_x, m.sigma_x, 1e-11 * m.sigma_x);
    EXPECT_NEAR(num.var_p, m.sigma_p, 1e-10 * m.sigma_p);
    EXPECT_NEAR(num.cov, m.sigma_xp, 1e-10 * std::max(1.0, std::abs(m.sigma_xp)));
  }
}

TEST(InitialState, RobertsonSchroedingerEqualityAndB) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ls(-2.0, 2.0), rho(-10.0, 10.0), lp(-2.0, 2.0), lz(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const PacketSpec p{std::pow(10.0, ls(rng)), rho(rng), 10.0, std::pow(10.0, lp(rng))};
    const auto m = cgp::initial_moments(p);
    const double sr = m.sigma_x * m.sigma_p - m.sigma_xp * m.sigma_xp;
    EXPECT_NEAR(sr, 0.25, 1e-12 * std::max(1.0, m.sigma_xp * m.sigma_xp));
    const auto pt = cgp::point_from_physical(p, {std::pow(10.0, lz(rng))});
    EXPECT_NEAR(pt.B, m.sigma_p / (p.p0 * p.p0), 1e-12 * pt.B);
    EXPECT_NEAR(m.r, cgp::correlation_from_rho(p.rho), 1e-12);
  }
}

TEST(Correlation, RoundTripAndEffectivePlanck) {
  for (double rho : {-50.0, -2.0, -0.3, 0.0, 0.1, 1.0, 7.0}) {
    const double r = cgp::correlation_from_rho(rho);
    EXPECT_LT(std::abs(r), 1.0);
    EXPECT_NEAR(cgp::rho_from_correlation(r), rho, 1e-12 * std::max(1.0, std::abs(rho)));
    EXPECT_NEAR(cgp::effective_planck(r), std::hypot(1.0, rho), 1e-12 * std::hypot(1.0, rho));
  }
  EXPECT_THROW(cgp::rho_from_correlation(1.0), cgp::domain_error);
  EXPECT_THROW(cgp::effective_planck(-1.0), cgp::domain_error);
}

TEST(FreeEvolution, MatchesInitialStateAtZeroTime) {
  const PacketSpec p{0.8, -1.4, 9.0, 2.0};
  for (double x = 3.0; x < 15.0; x += 0.37) {
    const cplx a = cgp::free_evolution(p, x, 0.0);
    const cplx b = cgp::initial_wavefunction(p, x);
    EXPECT_LT(std::abs(a - b), 1e-14);
  }
}

TEST(FreeEvolution, MatchesPropagatorQuadrature) {
  const PacketSpec p{1.0, 0.6, 10.0, 1.2};
  const double t = 1.7;
  // psi(x,t) = (2 pi i t)^{-1/2} int exp(i (x-x')^2 / 2t) psi(x',0) dx'
  const cplx pref = 1.0 / std::sqrt(cplx(0.0, 2.0 * M_PI * t));
  for (double x : {2.0, 6.0, 8.0, 9.5, 11.0}) {
    auto re = [&](double xp) {
      return (std::exp(cplx(0.0, (x - xp) * (x - xp) / (2.0 * t))) * cgp::initial_wavefunction(p, xp)).real();
    };
    auto im = [&](double xp) {
      return (std::exp(cplx(0.0, (x - xp) * (x - xp) / (2.0 * t))) * cgp::initial_wavefunction(p, xp)).imag();
    };
    const cplx ref = pref * cplx(integrate(re, p.x_c - 14.0, p.x_c + 14.0),
                                 integrate(im, p.x_c - 14.0, p.x_c + 14.0));
    EXPECT_LT(std::abs(cgp::free_evolution(p, x, t) - ref), 1e-11) << x;
  }
}

TEST(FreeEvolution, SpreadFormulaMatchesGridVariance) {
  for (double rho : {-2.0, -0.5, 0.0, 1.5}) {
    const PacketSpec p{1.0, rho, 10.0, 1.0};
    for (double t : {0.5, 2.0, 6.0}) {
      const double centre = p.x_c - p.p0 * t;
      const double w = 12.0 * std::sqrt(cgp::free_position_variance(p, t));
      auto dens = [&](double x) { return std::norm(cgp::free_evolution(p, x, t)); };
      const double n = integrate(dens, centre - w, centre + w);
      const double mx = integrate([&](double x) { return x * dens(x); }, centre - w, centre + w);
      const double x2 = integrate([&](double x) { return x * x * dens(x); }, centre - w, centre + w);
      EXPECT_NEAR(n, 1.0, 1e-12);
      EXPECT_NEAR(mx, centre, 1e-10);
      const double var = x2 - mx * mx;
      const auto m = cgp::initial_moments(p);
      const double expected = m.sigma_x + 2.0 * m.sigma_xp * t + m.sigma_p * t * t;
      EXPECT_NEAR(var, expected, 1e-10 * expected) << rho << " " << t;
      EXPECT_NEAR(cgp::free_position_variance(p, t), expected, 1e-13 * expected);
    }
  }
}

TEST(FreeEvolution, NegativeCorrelationFocusesFirst) {
  // rho < 0: the packet narrows until t = -rho s^2 / (1 + rho^2).
  const PacketSpec p{1.0, -1.0, 10.0, 1.0};
  EXPECT_LT(cgp::free_position_variance(p, 0.5), cgp::free_position_variance(p, 0.0));
  EXPECT_GT(cgp::free_position_variance(p, 2.0), cgp::free_position_variance(p, 0.5));
}

TEST(Validation, RejectsBadPackets) {
  EXPECT_THROW(cgp::validate(PacketSpec{0.0, 0.0, 10.0, 1.0}), cgp::domain_error);
  EXPECT_THROW(cgp::validate(PacketSpec{1.0, 0.0, 10.0, 0.0}), cgp::domain_error);
  EXPECT_THROW(cgp::validate(PacketSpec{1.0, 0.0, -1.0, 1.0}), cgp::domain_error);
  EXPECT_THROW(cgp::validate(PacketSpec{1.0, NAN, 10.0, 1.0}), cgp::domain_error);
  EXPECT_THROW(cgp::validate(cgp::BarrierSpec{-0.1}), cgp::domain_error);
  EXPECT_NO_THROW(cgp::validate(cgp::BarrierSpec{0.0}));
  EXPECT_THROW(cgp::validate(PacketSpec{1.0, 0.0, 5.0, 1.0}, cgp::FarFieldGuard{}), cgp::domain_error);
  EXPECT_NO_THROW(cgp::validate(PacketSpec{1.0, 0.0, 5.0, 1.0}, cgp::FarFieldGuard{8.0, false}));
  EXPECT_THROW(cgp::mu_of_t(PacketSpec{}, -1.0), cgp::domain_error);
}

TEST(Units, NaturalConversion) {
  cgp::PhysicalSetup phys;
  phys.mass = 2.0;
  phys.hbar = 0.5;
  phys.packet = PacketSpec{1.5, 0.3, 20.0, 3.0};
  phys.barrier = {0.25};
  const auto nat = cgp::to_natural_units(phys);
  EXPECT_DOUBLE_EQ(nat.packet.p0, 6.0);
  EXPECT_DOUBLE_EQ(nat.barrier.Z, 2.0);
  EXPECT_DOUBLE_EQ(nat.packet.s, 1.5);
  EXPECT_DOUBLE_EQ(nat.packet.x_c, 20.0);
  EXPECT_DOUBLE_EQ(nat.time(4.0), 1.0);
  // A and B are unit free.
  const auto a = cgp::point_from_physical(nat.packet, nat.barrier);
  EXPECT_NEAR(a.A, (phys.mass * phys.barrier.Z / (phys.hbar * phys.packet.p0)) *
                       (phys.mass * phys.barrier.Z / (phys.hbar * phys.packet.p0)),
              1e-15);
  phys.mass = 0.0;
  EXPECT_THROW(cgp::to_natural_units(phys), cgp::domain_error);
}

}  // namespace
