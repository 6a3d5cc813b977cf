#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "meshtrap/errors.hpp"
#include "meshtrap/specfn.hpp"

namespace meshtrap {

// Root of the weak-threshold characterization equation at one sparsity ratio.
struct ThresholdPoint {
  double beta_w = 0.0;
  double alpha_w = 0.0;
  double residual = 0.0;
  // Sign changes seen during the bracket scan. Uniqueness of the root is not
  // guaranteed a priori; anything > 1 is surfaced instead of silently picking.
  int sign_changes = 1;
};

// The perturbation constants of the threshold theorem and of the trapped /
// escape conditions. All dimensionless, arbitrarily small in the theory.
struct EpsilonSet {
  double eps1_c = 0.0;
  double eps2_c = 0.0;
  double eps1_m = 0.0;
  double eps1_g = 0.0;
  double eps3_g = 0.0;
  double eps5_g = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;

  void validate() const {
    for (double e : {eps1_c, eps2_c, eps1_m, eps1_g, eps3_g, eps5_g, eps1, eps2}) {
      if (!(e >= 0.0) || !(e < 0.5)) {
        throw DomainError("EpsilonSet: every epsilon must lie in [0, 0.5)");
      }
    }
  }
};

namespace detail {

constexpr double kSqrt2 = 1.4142135623730950488016887;
constexpr double kSqrt2Pi = 2.5066282746310005024157653;
constexpr double kSqrt2OverPi = 0.7978845608028653558798921;

struct RootScan {
  double root = 0.0;
  double residual = 0.0;
  int sign_changes = 0;
};

// Scan (lo, 1] from the right at `step` resolution, take the first sign
// change, then bisect it down to `width`. Bracketing is deliberate: the
// equations guarantee a root but nothing differentiability-friendly near the
// domain edges.
inline RootScan bisect_rightmost(const std::function<double(double)>& f, double lo,
                                 double step, double width, const char* what) {
  double hi_theta = 1.0;
  double hi_val = f(hi_theta);
  RootScan out;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  bool found = false;
  for (double theta = hi_theta - step;; theta -= step) {
    if (theta < lo) theta = lo;
    const double val = f(theta);
    if ((val <= 0.0) != (hi_val <= 0.0)) {
      ++out.sign_changes;
      if (!found) {
        bracket_lo = theta;
        bracket_hi = hi_theta;
        found = true;
      }
    }
    hi_theta = theta;
    hi_val = val;
    if (theta <= lo) break;
  }
  if (!found) throw NoRootError(std::string(what) + ": no sign change in bracket");

  double a = bracket_lo, b = bracket_hi;
  double fa = f(a);
  for (int it = 0; it < 200 && (b - a) > width; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if ((fm <= 0.0) == (fa <= 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  out.root = 0.5 * (a + b);
  out.residual = std::fabs(f(out.root));
  return out;
}

inline void require_beta(double beta, const char* what) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw DomainError(std::string(what) + ": beta_w must lie in (0, 1)");
  }
}

}  // namespace detail

// Left-hand side of the characterization equation whose root in theta is the
// weak threshold:
//   (1 - b) * sqrt(2/pi) * exp(-erfinv((1-theta)/(1-b))^2) / theta
//     - sqrt(2) * erfinv((1-theta)/(1-b)).
inline double threshold_equation(double beta_w, double theta) {
  if (!(beta_w >= 0.0 && beta_w < 1.0)) {
    throw DomainError("threshold_equation: beta_w must lie in [0, 1)");
  }
  if (!(theta > beta_w && theta <= 1.0)) {
    throw DomainError("threshold_equation: theta must lie in (beta_w, 1]");
  }
  const double arg = (1.0 - theta) / (1.0 - beta_w);
  const double t = erfinv(arg);
  return (1.0 - beta_w) * detail::kSqrt2OverPi * std::exp(-t * t) / theta -
         detail::kSqrt2 * t;
}

inline ThresholdPoint weak_threshold(double beta_w) {
  detail::require_beta(beta_w, "weak_threshold");
  const auto scan = detail::bisect_rightmost(
      [beta_w](double theta) { return threshold_equation(beta_w, theta); },
      beta_w + 1e-9, 1e-3, 1e-13, "weak_threshold");
  ThresholdPoint p;
  p.beta_w = beta_w;
  p.alpha_w = scan.root;
  p.residual = scan.residual;
  p.sign_changes = scan.sign_changes;
  return p;
}

// Root of the eps1_c-perturbed theta equation (success direction).
inline double theta_lower(double beta_w, const EpsilonSet& eps) {
  detail::require_beta(beta_w, "theta_lower");
  eps.validate();
  const double e = eps.eps1_c;
  auto lhs = [beta_w, e](double theta) {
    const double arg = (1.0 - theta) / (1.0 - beta_w);
    const double t0 = erfinv(arg);
    return (1.0 - e) * (1.0 - beta_w) * detail::kSqrt2OverPi * std::exp(-t0 * t0) / theta -
           detail::kSqrt2 * erfinv((1.0 + e) * arg);
  };
  // (1 + e) * (1 - theta) / (1 - beta) must stay below 1.
  double lo = std::max(beta_w + 1e-9, 1.0 - (1.0 - beta_w) / (1.0 + e) + 1e-9);
  if (lo >= 1.0) throw DomainError("theta_lower: perturbation leaves no valid bracket");
  const auto scan = detail::bisect_rightmost(lhs, lo, 1e-3, 1e-13, "theta_lower");
  if (scan.residual > 1e-10) throw NoRootError("theta_lower: residual above 1e-10");
  return scan.root;
}

// Root of the eps2_c-perturbed theta equation (failure direction).
inline double theta_upper(double beta_w, const EpsilonSet& eps) {
  detail::require_beta(beta_w, "theta_upper");
  eps.validate();
  const double e = eps.eps2_c;
  auto lhs = [beta_w, e](double theta) {
    const double arg = (1.0 - theta) / (1.0 - beta_w);
    const double t0 = erfinv(arg);
    return (1.0 + e) * (1.0 - beta_w) * detail::kSqrt2OverPi * std::exp(-t0 * t0) / theta -
           detail::kSqrt2 * erfinv((1.0 - e) * arg);
  };
  const auto scan =
      detail::bisect_rightmost(lhs, beta_w + 1e-9, 1e-3, 1e-13, "theta_upper");
  if (scan.residual > 1e-10) throw NoRootError("theta_upper: residual above 1e-10");
  return scan.root;
}

// Right-hand side of the success condition alpha > (...), evaluated at the
// perturbed theta root. With all epsilons zero this collapses to alpha_w.
inline double alpha_lower_bound(double beta_w, const EpsilonSet& eps) {
  const double theta = theta_lower(beta_w, eps);
  const double arg = (1.0 - theta) / (1.0 - beta_w);
  const double t = erfinv(arg);
  const double e2 = std::exp(-t * t);
  const double q = (1.0 - beta_w) * detail::kSqrt2OverPi * e2;
  return (1.0 - beta_w) / detail::kSqrt2Pi *
             (detail::kSqrt2Pi + 2.0 * std::sqrt(2.0 * t * t) * e2 -
              detail::kSqrt2Pi * arg) +
         beta_w - q * q / theta;
}

// Right-hand side of the failure condition alpha < (...), with the
// (1+eps1_m)^-2, (1-eps1_g) and (1+eps3_g)^2 factors in place.
inline double alpha_upper_bound(double beta_w, const EpsilonSet& eps) {
  const double theta = theta_upper(beta_w, eps);
  const double arg = (1.0 - theta) / (1.0 - beta_w);
  const double t = erfinv(arg);
  const double e2 = std::exp(-t * t);
  const double q = (1.0 - beta_w) * detail::kSqrt2OverPi * e2;
  const double inner =
      (1.0 - eps.eps1_g) *
          (theta + 2.0 * (1.0 - beta_w) / detail::kSqrt2Pi * std::sqrt(2.0 * t * t) * e2) -
      q * q * (1.0 + eps.eps3_g) * (1.0 + eps.eps3_g) / theta;
  return inner / ((1.0 + eps.eps1_m) * (1.0 + eps.eps1_m));
}

// Lower bound on P(the random null space misses S):
//   1 - c * exp(-(sqrt(m) - 1/(4 sqrt(m)) - w_D)^2 / 18), clamped to [0, 1].
// The original constant is 3.5; 2.5 is the later improvement. Valid only
// under the hypothesis w_D < sqrt(m) - 1/(4 sqrt(m)).
inline double escape_prob_lower_bound(double w_d, long m, double constant = 3.5) {
  if (!(w_d >= 0.0)) throw DomainError("escape_prob_lower_bound: w_d must be >= 0");
  if (m < 1) throw DomainError("escape_prob_lower_bound: m must be >= 1");
  if (!(constant > 0.0)) throw DomainError("escape_prob_lower_bound: constant must be > 0");
  const double sm = std::sqrt(static_cast<double>(m));
  const double edge = sm - 0.25 / sm;
  if (!(w_d < edge)) {
    throw HypothesisNotMet("escape_prob_lower_bound: requires w_d < sqrt(m) - 1/(4 sqrt(m))");
  }
  const double gap = edge - w_d;
  const double p = 1.0 - constant * std::exp(-gap * gap / 18.0);
  return std::clamp(p, 0.0, 1.0);
}

// Batch driver for the phase-diagram overlay; per-point failures are
// collected, not fatal.
struct CurveEntry {
  double beta_w = 0.0;
  std::optional<ThresholdPoint> point;
  std::string error;
};

inline std::vector<CurveEntry> threshold_curve(const std::vector<double>& betas) {
  std::vector<CurveEntry> out;
  out.reserve(betas.size());
  for (double b : betas) {
    CurveEntry e;
    e.beta_w = b;
    try {
      e.point = weak_threshold(b);
    } catch (const Error& err) {
      e.error = err.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace meshtrap
