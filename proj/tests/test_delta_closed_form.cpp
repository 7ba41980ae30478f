#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cgp/delta_closed_form.hpp"
#include "cgp/transmission.hpp"

namespace {

using cgp::BarrierSpec;
using cgp::cplx;
using cgp::PacketSpec;

template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

// With the packet supported on x > 0, the propagator integral reduces to
//   psi(x,t) = psi_free(x,t) - Z int_0^inf exp(-u Z) psi_free(-|x| - u, t) du.
cplx single_integral_oracle(const PacketSpec& p, const BarrierSpec& b, double x, double t) {
  const double upper = 40.0 / b.Z;
  auto re = [&](double u) {
    return std::exp(-u * b.Z) * cgp::free_evolution(p, -std::abs(x) - u, t).real();
  };
  auto im = [&](double u) {
    return std::exp(-u * b.Z) * cgp::free_evolution(p, -std::abs(x) - u, t).imag();
  };
  const cplx tail(integrate(re, 0.0, upper), integrate(im, 0.0, upper));
  return cgp::free_evolution(p, x, t) - b.Z * tail;
}

double peak_amplitude(const PacketSpec& p, double t) {
  return std::abs(cgp::free_evolution(p, p.x_c - p.p0 * t, t));
}

struct Case {
  PacketSpec packet;
  double Z;
};

TEST(ClosedForm, MatchesSingleIntegralOracle) {
  const std::vector<Case> cases = {
      {{1.0, 0.0, 10.0, 2.0}, 2.0},  {{1.0, 1.5, 12.0, 1.0}, 0.5}, {{0.7, -0.8, 9.0, 3.0}, 4.0},
      {{2.0, 3.0, 20.0, 1.0}, 1.0},  {{1.0, -2.0, 10.0, 2.0}, 2.0},
  };
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(-30.0, 30.0), ut(0.2, 25.0);
  for (const auto& c : cases) {
    for (int i = 0; i < 40; ++i) {
      const double x = ux(rng);
      const double t = ut(rng);
      const BarrierSpec b{c.Z};
      const cplx got = cgp::evolved_wavefunction(c.packet, b, x, t);
      const cplx ref = single_integral_oracle(c.packet, b, x, t);
      EXPECT_LT(std::abs(got - ref), 1e-10 * peak_amplitude(c.packet, t))
          << "rho=" << c.packet.rho << " x=" << x << " t=" << t;
    }
  }
}

TEST(ClosedForm, BranchForStronglyNegativeCorrelation) {
  // rho = -2: arg(gamma mu) passes pi near t = 0.4, so the principal root of
  // 2 gamma mu flips sign there. The evaluation must stay on the right branch.
  const PacketSpec p{1.0, -2.0, 10.0, 2.0};
  const BarrierSpec b{2.0};
  for (double t : {0.3, 0.5, 5.0, 50.0, 200.0}) {
    const cplx gm = p.gamma() * cgp::mu_of_t(p, t);
    for (double x : {-0.5 * p.p0 * t, -3.0, 0.0, 2.0, 8.0}) {
      const cplx got = cgp::evolved_wavefunction(p, b, x, t);
      const cplx ref = single_integral_oracle(p, b, x, t);
      EXPECT_LT(std::abs(got - ref), 1e-10 * peak_amplitude(p, t))
          << "t=" << t << " x=" << x << " arg(gamma mu)=" << std::arg(gm);
    }
  }
}

TEST(ClosedForm, ReducesToFreePacketWithoutBarrier) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(-40.0, 40.0), ut(0.0, 30.0), urho(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const PacketSpec p{1.0, urho(rng), 12.0, 1.5};
    const double x = ux(rng);
    const double t = ut(rng);
    const cplx a = cgp::evolved_wavefunction(p, {0.0}, x, t);
    const cplx f = cgp::free_evolution(p, x, t);
    EXPECT_LE(std::abs(a - f), 1e-12 * std::abs(f));
  }
}

TEST(ClosedForm, ContinuityAndJumpConditionAtOrigin) {
  const PacketSpec p{1.0, 0.5, 10.0, 2.0};
  const BarrierSpec b{1.5};
  const double h = 1e-4;
  for (double t : {3.0, 5.0, 8.0}) {
    auto psi = [&](double x) { return cgp::evolved_wavefunction(p, b, x, t); };
    const cplx at0 = psi(0.0);
    EXPECT_LT(std::abs(psi(1e-12) - psi(-1e-12)), 1e-10 * std::abs(at0));
    const cplx right = (-3.0 * at0 + 4.0 * psi(h) - psi(2.0 * h)) / (2.0 * h);
    const cplx left = (3.0 * at0 - 4.0 * psi(-h) + psi(-2.0 * h)) / (2.0 * h);
    EXPECT_LT(std::abs((right - left) - 2.0 * b.Z * at0), 1e-6 * std::abs(at0)) << t;
  }
}

TEST(ClosedForm, SatisfiesFreeSchroedingerAwayFromBarrier) {
  const PacketSpec p{1.0, -0.7, 10.0, 1.5};
  const BarrierSpec b{1.0};
  const double h = 1e-3;
  const double t = 6.0;
  for (double x : {-4.0, -1.0, 1.0, 5.0}) {
    auto psi = [&](double xx, double tt) { return cgp::evolved_wavefunction(p, b, xx, tt); };
    const cplx dt = (psi(x, t + h) - psi(x, t - h)) / (2.0 * h);
    const cplx dxx = (psi(x + h, t) - 2.0 * psi(x, t) + psi(x - h, t)) / (h * h);
    EXPECT_LT(std::abs(cplx(0.0, 1.0) * dt + 0.5 * dxx), 1e-5 * peak_amplitude(p, t)) << x;
  }
}

TEST(ClosedForm, RecoversInitialStateAtTimeZero) {
  const PacketSpec p{1.0, 0.8, 10.0, 2.0};
  const BarrierSpec b{3.0};
  for (double x : {4.0, 8.0, 10.0, 13.0}) {
    const cplx got = cgp::evolved_wavefunction(p, b, x, 0.0);
    EXPECT_LT(std::abs(got - cgp::initial_wavefunction(p, x)), 1e-12);
  }
  for (double x : {-5.0, -1.0, -0.1}) {
    EXPECT_LE(std::abs(cgp::evolved_wavefunction(p, b, x, 0.0)), std::exp(-0.5 * 100.0));
  }
}

TEST(ClosedForm, GridNormIsConserved) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const auto g = cgp::sample_evolved(p, {2.0}, 10.0, -80.0, 80.0, 16001);
  EXPECT_NEAR(g.norm(), 1.0, 1e-3);
  EXPECT_NEAR(g.norm(), 1.0, 1e-6);
}

TEST(ClosedForm, FarFieldGuard) {
  const PacketSpec near{1.0, 0.0, 4.0, 2.0};
  EXPECT_THROW(cgp::evolved_wavefunction(near, {1.0}, 0.0, 1.0), cgp::domain_error);
  cgp::ClosedFormGuards relaxed;
  relaxed.farfield.enforce = false;
  EXPECT_NO_THROW(cgp::evolved_wavefunction(near, {1.0}, 0.0, 1.0, relaxed));
  EXPECT_THROW(cgp::evolved_wavefunction(PacketSpec{}, {1.0}, 0.0, -1.0), cgp::domain_error);
}

TEST(DParameter, ExactValueAtTimeZero) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const cplx d = cgp::d_parameter(p, {1.0}, 0.0, 0.0);
  const cplx expected = cplx(11.0, -2.0) / std::sqrt(2.0);
  EXPECT_LT(std::abs(d - expected), 1e-14);
  EXPECT_EQ(cgp::d_parameter(p, {1.0}, 5.0, 3.0), cgp::d_parameter(p, {1.0}, -5.0, 3.0));
}

TEST(DParameter, RealPartGrowsLikeSqrtTime) {
  const PacketSpec p{1.0, 0.4, 10.0, 2.0};
  const double T = 1e5;
  const double ratio = cgp::d_parameter(p, {1.0}, 0.0, 4.0 * T).real() /
                       cgp::d_parameter(p, {1.0}, 0.0, T).real();
  EXPECT_NEAR(ratio, 2.0, 0.1);
}

TEST(DParameter, ArgumentStaysInsideAsymptoticSector) {
  for (double rho : {-2.0, 0.0, 1.5}) {
    const PacketSpec p{1.0, rho, 10.0, 2.0};
    for (double t = 0.0; t <= 60.0; t += 1.5) {
      for (double x = -60.0; x <= 60.0; x += 2.5) {
        const cplx d = cgp::d_parameter(p, {2.0}, x, t);
        EXPECT_LT(std::abs(std::arg(d)), 0.75 * std::numbers::pi);
      }
    }
  }
}

TEST(DParameter, NegativeRealPartIsAValidityError) {
  const PacketSpec p{1.0, 0.0, 10.0, 50.0};
  EXPECT_THROW(cgp::d_parameter(p, {0.1}, 0.0, 1.0), cgp::validity_error);
  EXPECT_THROW(cgp::evolved_wavefunction(p, {0.1}, 0.0, 1.0), cgp::validity_error);
}

// The asymptote keeps only the leading term of erfcx(D) ~ 1/(sqrt(pi) D) *
// (1 - 1/(2 D^2) + ...). Its relative error is therefore close to
// |mu Z / g| / (2 |D|^2), which can exceed 1e-3 even with Re(D) >= 8.
TEST(LeftAsymptote, ErrorIsTheNextAsymptoticTerm) {
  const PacketSpec p{1.0, 0.3, 10.0, 2.0};
  const BarrierSpec b{2.0};
  int checked = 0;
  int tight = 0;
  for (double t : {10.0, 20.0, 40.0}) {
    for (double x = -5.0; x > -200.0; x -= 3.0) {
      const auto as = cgp::asymptotic_left_wavefunction(p, b, x, t);
      if (as.d.real() < 8.0) continue;
      const cplx exact = cgp::evolved_wavefunction(p, b, x, t);
      const cplx g = p.gamma() * (std::abs(x) + p.x_c) - cplx(0.0, p.p0 * p.s * p.s);
      const double predicted =
          std::abs(cgp::mu_of_t(p, t) * b.Z / g) / (2.0 * std::norm(as.d));
      const double rel = std::abs(as.psi - exact) / std::abs(exact);
      EXPECT_NEAR(rel, predicted, 0.1 * predicted) << x << " " << t;
      if (predicted <= 5e-4) {
        EXPECT_LE(rel, 1e-3) << x << " " << t;
        ++tight;
      }
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
  EXPECT_GT(tight, 10);
}

TEST(LeftAsymptote, FlagsSmallReD) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const PacketSpec fast{1.0, 0.0, 10.0, 4.0};
  const auto weak = cgp::asymptotic_left_wavefunction(fast, {0.01}, -1.0, 4.0);
  EXPECT_LT(weak.d.real(), 5.0);
  EXPECT_FALSE(weak.reliable);
  const auto strong = cgp::asymptotic_left_wavefunction(p, {2.0}, -10.0, 20.0);
  EXPECT_TRUE(strong.reliable);
  EXPECT_THROW(cgp::asymptotic_left_wavefunction(p, {1.0}, 0.0, 1.0), cgp::domain_error);
}

TEST(LeftAsymptote, ReducesToFreeAndShrinksAtTimeZero) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const auto free = cgp::asymptotic_left_wavefunction(p, {0.0}, -3.0, 4.0);
  EXPECT_EQ(free.psi, cgp::free_evolution(p, -3.0, 4.0));
  for (double x : {-0.5, -2.0, -7.0}) {
    const auto r = cgp::asymptotic_left_wavefunction(p, {1.0}, x, 0.0);
    EXPECT_LT(std::abs(r.psi), std::abs(cgp::free_evolution(p, x, 0.0)));
  }
}

TEST(LargeTime, LeftProbabilityConvergesToT) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const BarrierSpec b{2.0};
  const double target = cgp::transmission_T(cgp::point_from_physical(p, b)).value;
  double previous = 1.0;
  for (double t : {50.0, 100.0, 200.0}) {
    const double reach = 2.0 * (p.p0 + 6.0 * std::sqrt(cgp::initial_moments(p).sigma_p)) * t;
    const auto n = static_cast<std::size_t>(2.0 * reach / 0.01) + 1;
    const auto g = cgp::sample_evolved(p, b, t, -reach, reach, n);
    const double err = std::abs(g.norm_left() - target);
    EXPECT_LT(err, previous) << t;
    previous = err;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(AsymptoticDensity, IntegratesToT) {
  for (double rho : {0.0, -1.0, 2.0}) {
    const PacketSpec p{1.0, rho, 10.0, 2.0};
    const BarrierSpec b{1.0};
    const auto pt = cgp::point_from_physical(p, b);
    const double t = 400.0;
    const double sb = std::sqrt(pt.B);
    auto f = [&](double y) {
      return cgp::asymptotic_density(p, b, y, t, cgp::DensityMeasure::per_y);
    };
    const double total = integrate(f, -14.0 * sb, 0.0) + integrate(f, 0.0, 1.0);
    EXPECT_NEAR(total, cgp::transmission_T(pt).value, 1e-10) << rho;
  }
}

TEST(AsymptoticDensity, PlaneWaveFactorAtCentreAndFreeWithoutBarrier) {
  const PacketSpec p{1.0, 0.5, 10.0, 2.0};
  const double t = 500.0;
  const double A = 0.75;
  const BarrierSpec b{std::sqrt(A) * p.p0};
  const double free0 = cgp::asymptotic_density(p, {0.0}, 0.0, t);
  EXPECT_NEAR(cgp::asymptotic_density(p, b, 0.0, t), free0 / (1.0 + A), 1e-15);
  for (double y : {-0.4, 0.2, 0.9}) {
    const double s2 = (1.0 + p.rho * p.rho);
    const double expected = p.s / (t * std::sqrt(std::numbers::pi * s2)) *
                            std::exp(-(p.s * p.p0 * y) * (p.s * p.p0 * y) / s2);
    EXPECT_NEAR(cgp::asymptotic_density(p, {0.0}, y, t), expected, 1e-15);
  }
  EXPECT_THROW(cgp::asymptotic_density(p, b, 0.0, 10.0), cgp::domain_error);
}

TEST(AsymptoticDensity, MatchesExactDensityAtLargeTime) {
  const PacketSpec p{1.0, 0.0, 10.0, 2.0};
  const BarrierSpec b{2.0};
  const double t = 4000.0;
  for (double y : {-0.3, 0.0, 0.3, 0.6}) {
    const double x = p.x_c + p.p0 * t * (y - 1.0);
    const double exact = std::norm(cgp::evolved_wavefunction(p, b, x, t));
    EXPECT_NEAR(cgp::asymptotic_density(p, b, y, t), exact, 2e-2 * exact) << y;
  }
}

}  // namespace
