#pragma once

// Independent reference implementations used only by the test suites. They
// deliberately share no code with the library paths they check: erf comes
// from a Taylor series and a continued fraction, widths from a brute-force
// lambda grid, projections from sign-pattern enumeration, and basis pursuit
// from basic-feasible-solution enumeration of the split LP.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

namespace oracles {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- special functions ----

inline long double erf_taylor(long double x) {
  const long double two_over_sqrt_pi = 1.128379167095512573896158903121545172L;
  long double term = x;
  long double sum = x;
  for (int j = 1; j <= 40; ++j) {
    term *= -x * x / static_cast<long double>(j);
    sum += term / static_cast<long double>(2 * j + 1);
  }
  return two_over_sqrt_pi * sum;
}

// Modified Lentz on erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + ...)))
inline long double erfc_cf(long double x) {
  const long double sqrt_pi = 1.772453850905516027298167483341145183L;
  const long double tiny = 1e-300L;
  long double f = x != 0.0L ? x : tiny;
  long double c = f;
  long double d = 0.0L;
  for (int i = 1; i <= 200; ++i) {
    const long double a = static_cast<long double>(i) / 2.0L;
    d = x + a * d;
    if (d == 0.0L) d = tiny;
    c = x + a / c;
    if (c == 0.0L) c = tiny;
    d = 1.0L / d;
    const long double delta = c * d;
    f *= delta;
    if (std::fabs(static_cast<double>(delta - 1.0L)) < 1e-19) break;
  }
  return std::exp(-x * x) / (sqrt_pi * f);
}

inline double erf(double x) {
  const long double ax = std::fabs(static_cast<long double>(x));
  const long double val = ax <= 2.0L ? erf_taylor(ax) : 1.0L - erfc_cf(ax);
  return static_cast<double>(x < 0 ? -val : val);
}

inline double erfinv(double y) {
  double lo = 0.0, hi = 8.0;
  const double target = std::fabs(y);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (erf(mid) < target ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return y < 0 ? -x : x;
}

// ---- threshold characterization, assembled independently ----

inline double threshold_lhs(double beta, double theta) {
  const double arg = (1.0 - theta) / (1.0 - beta);
  const double t = erfinv(arg);
  return (1.0 - beta) * std::sqrt(2.0 / 3.14159265358979323846) * std::exp(-t * t) / theta -
         std::sqrt(2.0) * t;
}

inline double perturbed_theta_lhs_lower(double beta, double e, double theta) {
  const double arg = (1.0 - theta) / (1.0 - beta);
  const double t0 = erfinv(arg);
  return (1.0 - e) * (1.0 - beta) * std::sqrt(2.0 / 3.14159265358979323846) *
             std::exp(-t0 * t0) / theta -
         std::sqrt(2.0) * erfinv((1.0 + e) * arg);
}

inline double perturbed_theta_lhs_upper(double beta, double e, double theta) {
  const double arg = (1.0 - theta) / (1.0 - beta);
  const double t0 = erfinv(arg);
  return (1.0 + e) * (1.0 - beta) * std::sqrt(2.0 / 3.14159265358979323846) *
             std::exp(-t0 * t0) / theta -
         std::sqrt(2.0) * erfinv((1.0 - e) * arg);
}

// Rightmost root by scan + bisection of an arbitrary theta equation.
template <typename F>
inline double rightmost_root(F&& f, double lo, double hi, int scan_points = 100000) {
  double prev_theta = hi;
  double prev_val = f(hi);
  double blo = lo, bhi = hi;
  bool found = false;
  for (int i = 1; i <= scan_points; ++i) {
    const double theta = hi - (hi - lo) * i / static_cast<double>(scan_points);
    const double val = f(theta);
    if ((val <= 0.0) != (prev_val <= 0.0)) {
      blo = theta;
      bhi = prev_theta;
      found = true;
      break;
    }
    prev_theta = theta;
    prev_val = val;
  }
  if (!found) return std::numeric_limits<double>::quiet_NaN();
  double fa = f(blo);
  for (int it = 0; it < 200 && (bhi - blo) > 1e-15; ++it) {
    const double mid = 0.5 * (blo + bhi);
    const double fm = f(mid);
    if ((fm <= 0.0) == (fa <= 0.0)) {
      blo = mid;
      fa = fm;
    } else {
      bhi = mid;
    }
  }
  return 0.5 * (blo + bhi);
}

// ---- cone quantities by brute force ----

// D(t) evaluated directly from its definition.
inline double width_quadratic(Eigen::Index k, const Vector& g, double t) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) d += (g[i] - t) * (g[i] - t);
  for (Eigen::Index i = k; i < g.size(); ++i) {
    const double r = std::fabs(g[i]) - t;
    if (r > 0.0) d += r * r;
  }
  return d;
}

// min over a t-grid of resolution `step` of sqrt(D(t)).
inline double xi_grid(Eigen::Index k, const Vector& g, double step = 1e-5) {
  double hi = 0.0;
  for (Eigen::Index i = k; i < g.size(); ++i) hi = std::max(hi, std::fabs(g[i]));
  if (k > 0) hi = std::max(hi, g.head(k).sum() / static_cast<double>(k));
  hi += 0.1;
  double best = std::numeric_limits<double>::infinity();
  const long npts = static_cast<long>(hi / step) + 1;
  for (long i = 0; i <= npts; ++i) {
    best = std::min(best, width_quadratic(k, g, step * static_cast<double>(i)));
  }
  return std::sqrt(std::max(best, 0.0));
}

// Projection onto {w : sum_{i<k} w_i + sum_{i>=k} |w_i| <= 0} by exhausting
// sign patterns {-1, 0, +1} of the off-support coordinates. For each pattern
// the active-constraint projection is a rank-one update; candidates must be
// sign-consistent. Exact for n - k small.
inline Vector project_bruteforce(Eigen::Index k, const Vector& g) {
  const Eigen::Index n = g.size();
  double f_g = g.head(k).sum();
  for (Eigen::Index i = k; i < n; ++i) f_g += std::fabs(g[i]);
  if (f_g <= 0.0) return g;

  const Eigen::Index off = n - k;
  Vector best = Vector::Zero(n);
  double best_dist = g.squaredNorm();  // w = 0 is always feasible

  std::vector<int> pattern(static_cast<std::size_t>(off), -1);
  const long total = static_cast<long>(std::pow(3.0, static_cast<double>(off)));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (Eigen::Index i = 0; i < off; ++i) {
      pattern[static_cast<std::size_t>(i)] = static_cast<int>(c % 3) - 1;
      c /= 3;
    }
    // a_i: gradient of the active constraint under this pattern
    Vector a = Vector::Zero(n);
    a.head(k).setOnes();
    for (Eigen::Index i = 0; i < off; ++i) a[k + i] = pattern[static_cast<std::size_t>(i)];
    const double asq = a.squaredNorm();
    if (asq == 0.0) continue;
    const double mu = a.dot(g) / asq;
    if (mu < 0.0) continue;
    Vector w(n);
    for (Eigen::Index i = 0; i < k; ++i) w[i] = g[i] - mu;
    bool consistent = true;
    for (Eigen::Index i = 0; i < off; ++i) {
      const int s = pattern[static_cast<std::size_t>(i)];
      if (s == 0) {
        w[k + i] = 0.0;
        if (std::fabs(g[k + i]) > mu + 1e-12) consistent = false;
      } else {
        w[k + i] = g[k + i] - mu * s;
        if (w[k + i] * s < -1e-12) consistent = false;
      }
    }
    if (!consistent) continue;
    const double dist = (w - g).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = w;
    }
  }
  return best;
}

// ---- basis pursuit LP by vertex enumeration ----
// min 1'(u + v) s.t. [A, -A][u; v] = y, u, v >= 0. Every optimal LP has an
// optimal basic feasible solution; enumerate all m-column bases.
inline double basis_pursuit_optimum(const Matrix& A, const Vector& y) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Matrix full(m, 2 * n);
  full << A, -A;

  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(m));
  // iterate over all m-subsets of the 2n columns
  for (Eigen::Index i = 0; i < m; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    Matrix basis(m, m);
    for (Eigen::Index i = 0; i < m; ++i) basis.col(i) = full.col(pick[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Matrix> lu(basis);
    if (lu.isInvertible()) {
      const Vector xb = lu.solve(y);
      if ((basis * xb - y).lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + y.lpNorm<Eigen::Infinity>()) &&
          xb.minCoeff() >= -1e-9) {
        double obj = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) obj += std::max(xb[i], 0.0);
        best = std::min(best, obj);
      }
    }
    // next combination
    Eigen::Index pos = m - 1;
    while (pos >= 0 && pick[static_cast<std::size_t>(pos)] == 2 * n - m + pos) --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (Eigen::Index j = pos + 1; j < m; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  // y = 0 (or within tolerance of it) always admits the zero solution
  if (y.lpNorm<Eigen::Infinity>() <= 1e-15) best = std::min(best, 0.0);
  return best;
}

inline bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

}  // namespace oracles
