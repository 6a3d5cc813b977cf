#pragma once

#include <cmath>

#include "meshtrap/errors.hpp"

namespace meshtrap {

namespace detail {
constexpr double kPi = 3.141592653589793238462643;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589;
}  // namespace detail

// Odd by construction: erf(-x) == -erf(x) bit for bit.
inline double erf(double x) {
  return x < 0.0 ? -std::erf(-x) : std::erf(x);
}

inline double erfc(double x) { return std::erfc(x); }

inline double gaussian_pdf(double x) {
  return detail::kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double gaussian_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865475244008444);
}

// Inverse of erf on (-1, 1): closed-form initial guess refined by Newton
// iterations against erf. Odd symmetry is exact by construction.
inline double erfinv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    throw DomainError("erfinv: argument must lie in (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  const double a = std::fabs(y);

  // Winitzki's approximation, good to ~3 digits everywhere on (0, 1).
  constexpr double c = 0.147;
  const double l = std::log1p(-a * a);
  const double u = 2.0 / (detail::kPi * c) + 0.5 * l;
  double x = std::sqrt(std::sqrt(u * u - l / c) - u);

  // Newton on erf(x) - a. Quadratic; six iterations cover the far tail,
  // mid-range converges in three.
  for (int it = 0; it < 6; ++it) {
    const double err = std::erf(x) - a;
    const double deriv = detail::kTwoOverSqrtPi * std::exp(-x * x);
    const double step = err / deriv;
    x -= step;
    if (std::fabs(step) <= 1e-17 * (1.0 + x)) break;
  }
  return y < 0.0 ? -x : x;
}

}  // namespace meshtrap
