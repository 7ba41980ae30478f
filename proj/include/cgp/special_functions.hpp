#pragma once

// Complex complementary error function, its scaled form erfcx(z) =
// exp(z^2) erfc(z), and the half-line Gaussian integral built on them.
//
// Everything is routed through the Faddeeva function w(z) = exp(-z^2)
// erfc(-iz), evaluated only in the closed upper half-plane:
//   * far from the origin: Laplace continued fraction,
//   * elsewhere: the exponentially convergent sums of Zaghloul & Ali
//     (ACM TOMS 916), with the real erfcx on the imaginary axis.
// Region boundaries follow S. G. Johnson's Faddeeva package.

#include <cmath>
#include <complex>
#include <limits>

#include "cgp/errors.hpp"

namespace cgp {

using cplx = std::complex<double>;

namespace detail {

inline constexpr double inv_sqrt_pi = 0.564189583547756286948079451560772585844;

// exp(+x^2) and exp(-x^2) with the square split into exact head and tail,
// so large arguments keep full relative precision.
inline double exp_x2(double x) {
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  return std::exp(hi) * (1.0 + lo);
}

inline double exp_mx2(double x) {
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  return std::exp(-hi) * (1.0 - lo);
}

// exp(-z^2) for complex z, with Re(z^2) formed as (y-x)(y+x).
inline cplx exp_neg_square(cplx z) {
  const double x = z.real();
  const double y = z.imag();
  const double re = (y - x) * (y + x);
  const double im = -2.0 * x * y;
  return std::polar(std::exp(re), im);
}

inline double sinc(double u, double sin_u) { return u == 0.0 ? 1.0 : sin_u / u; }

// Laplace continued fraction for w(z), Im z >= 0, |z| not small.
inline cplx faddeeva_continued_fraction(cplx z) {
  const double x = std::abs(z.real());
  const double y = z.imag();
  if (x + y > 1e7) return cplx(0.0, inv_sqrt_pi) / z;
  // Term count from Johnson's fit, plus a safety margin.
  const double nu = std::floor(3.9 + 11.398 / (0.08254 * x + 0.1421 * y + 0.2023)) + 4.0;
  cplx w = z;
  for (double k = 0.5 * (nu - 1.0); k > 0.4; k -= 0.5) w = z - k / w;
  return cplx(0.0, inv_sqrt_pi) / w;
}

inline double erfcx_real(double x);

// Zaghloul-Ali sums for w(z), Im z >= 0.
inline cplx faddeeva_sums(cplx z) {
  constexpr double a = 0.518321480430085929872424921634;   // pi / sqrt(53 ln 2)
  constexpr double a2 = 0.268657157075235951582276900214;  // a^2
  constexpr double c = 0.329973702884629072537181787155;   // 2a/pi
  constexpr double eps = std::numeric_limits<double>::epsilon();

  const double xs = z.real();
  const double x = std::abs(xs);
  const double y = z.imag();
  const double y2 = y * y;
  const double expx2 = exp_mx2(x);
  const bool small_x = x < 0.5;

  double sum1 = 0.0;   // sum e^{-a^2 n^2 - x^2} / (a^2 n^2 + y^2)
  double sum23 = 0.0;  // sum (e^{-(an+x)^2} + e^{-(an-x)^2}) / (...)
  double sum54 = 0.0;  // sum a n (e^{-(an-x)^2} - e^{-(an+x)^2}) / (...)
  double sum5 = 0.0;
  const double n_peak = x / a;
  for (int n = 1; n < 1000; ++n) {
    const double an = a * static_cast<double>(n);
    const double denom = a2 * static_cast<double>(n) * static_cast<double>(n) + y2;
    const double base = std::exp(-an * an) * expx2 / denom;
    sum1 += base;
    double term5;
    if (small_x) {
      const double arg = 2.0 * an * x;
      sum23 += 2.0 * base * std::cosh(arg);
      sum54 += 2.0 * an * base * std::sinh(arg);
      term5 = an * base * std::exp(arg);
      sum5 += term5;
    } else {
      const double tp = std::exp(-(an - x) * (an - x)) / denom;
      const double tm = std::exp(-(an + x) * (an + x)) / denom;
      sum23 += tp + tm;
      sum54 += an * (tp - tm);
      term5 = an * tp;
      sum5 += term5;
    }
    if (static_cast<double>(n) > n_peak && term5 <= eps * 0.25 * sum5) break;
  }

  const double expx2_erfcxy = expx2 * erfcx_real(y);
  const double coef1 = expx2_erfcxy - c * y * sum1;
  const double coef2 = c * xs * expx2;
  const double sin_xy = std::sin(xs * y);
  const double sin_2xy = std::sin(2.0 * xs * y);
  const double cos_2xy = std::cos(2.0 * xs * y);

  const double re = coef1 * cos_2xy + coef2 * sin_xy * sinc(xs * y, sin_xy) + 0.5 * c * y * sum23;
  const double im = coef2 * sinc(2.0 * xs * y, sin_2xy) - coef1 * sin_2xy +
                    0.5 * c * std::copysign(sum54, xs);
  return {re, im};
}

// Real scaled complementary error function.
inline double erfcx_real(double x) {
  if (x < 0.0) {
    if (x < -26.7) return std::numeric_limits<double>::infinity();
    return 2.0 * exp_x2(x) - erfcx_real(-x);
  }
  if (x < 25.0) return exp_x2(x) * std::erfc(x);
  // Continued fraction, converges quickly for large x.
  double w = x;
  for (double k = 10.0; k > 0.4; k -= 0.5) w = x + k / w;
  return inv_sqrt_pi / w;
}

}  // namespace detail

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
inline cplx faddeeva_w(cplx z) {
  if (z.imag() < 0.0) {
    // w(z) = 2 exp(-z^2) - w(-z)
    return 2.0 * detail::exp_neg_square(z) - faddeeva_w(-z);
  }
  const double x = std::abs(z.real());
  const double y = z.imag();
  const bool use_cf = y > 7.0 || (x > 6.0 && (y > 0.1 || (x > 8.0 && y > 1e-10) || x > 28.0));
  return use_cf ? detail::faddeeva_continued_fraction(z) : detail::faddeeva_sums(z);
}

/// Scaled complementary error function exp(z^2) erfc(z). Accurate to ~1e-13
/// relative on the closed right half-plane; on the left half-plane it is
/// obtained by reflection and may overflow where exp(z^2) does.
inline cplx erfcx(cplx z) {
  if (z.real() >= 0.0) return faddeeva_w(cplx(-z.imag(), z.real()));
  return 2.0 * std::exp(z * z) - faddeeva_w(cplx(z.imag(), -z.real()));
}

/// Complex complementary error function 1 - erf(z).
inline cplx erfc(cplx z) {
  if (z.real() >= 0.0) {
    return detail::exp_neg_square(z) * faddeeva_w(cplx(-z.imag(), z.real()));
  }
  const cplx mz = -z;
  return 2.0 - detail::exp_neg_square(mz) * faddeeva_w(cplx(-mz.imag(), mz.real()));
}

/// Integral of exp(-a u^2 + b u) over u in [0, inf):
///   (1/2) sqrt(pi/a) exp(b^2/4a) erfc(-b / (2 sqrt a))
/// evaluated as (sqrt(pi)/2) erfcx(-b/(2 sqrt a)) / sqrt(a), principal root.
/// Requires Re(a) > 0.
inline cplx gaussian_halfline_integral(cplx a, cplx b) {
  if (!(a.real() > 0.0)) {
    throw domain_error("gaussian_halfline_integral: requires Re(a) > 0");
  }
  const cplx sqrt_a = std::sqrt(a);
  const cplx zeta = -b / (2.0 * sqrt_a);
  return (0.5 / detail::inv_sqrt_pi) * erfcx(zeta) / sqrt_a;
}

}  // namespace cgp
