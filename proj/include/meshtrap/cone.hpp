#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "meshtrap/errors.hpp"
#include "meshtrap/linalg.hpp"
#include "meshtrap/parallel.hpp"
#include "meshtrap/rng.hpp"

namespace meshtrap {

// The l1 descent set on the unit sphere:
//   S = { w : ||w||_2 = 1,  sum_{i<k} w_i + sum_{i>=k} |w_i| <= 0 }.
// The support sits on the first k coordinates with the sign convention
// absorbed into the functional; the Gaussian ensemble makes any other
// fixed support/sign choice equivalent. The functional is positively
// homogeneous of degree 1, so {f <= 0} is a closed convex cone.
struct ConeSpec {
  Index n = 0;
  Index k = 0;
  int degree = 1;

  void validate() const {
    if (n < 1) throw DomainError("ConeSpec: n must be >= 1");
    if (k < 0 || k > n) throw DomainError("ConeSpec: k must lie in [0, n]");
    if (degree != 1) throw DomainError("ConeSpec: only degree-1 homogeneity is supported");
  }
};

namespace detail {
inline void require_length(const ConeSpec& cone, Index len, const char* op) {
  cone.validate();
  if (len != cone.n) {
    throw DomainError(std::string(op) + ": vector length does not match cone dimension");
  }
}
}  // namespace detail

// f(w) = sum_{i<k} w_i + sum_{i>=k} |w_i|, evaluated exactly as stated.
inline double descent_value(const ConeSpec& cone, const Eigen::Ref<const Vector>& w) {
  detail::require_length(cone, w.size(), "descent_value");
  return w.head(cone.k).sum() + w.tail(cone.n - cone.k).cwiseAbs().sum();
}

inline bool contains(const ConeSpec& cone, const Eigen::Ref<const Vector>& w, double tol) {
  detail::require_length(cone, w.size(), "contains");
  if (!(tol > 0.0)) throw DomainError("contains: tol must be positive");
  return std::fabs(w.norm() - 1.0) <= tol && descent_value(cone, w) <= tol;
}

// One draw of the dual width surrogate
//   min_{t >= 0} max_{||w||=1} (g'w - t f(w)) = min_{t >= 0} sqrt(D(t)),
//   D(t) = sum_{i<k} (g_i - t)^2 + sum_{i>=k} max(|g_i| - t, 0)^2.
// D is convex and piecewise quadratic with breakpoints at |g_i|, i >= k;
// the minimiser is found exactly by sorting the breakpoints and accepting
// the interval that contains its own stationary point. Ties between equal
// breakpoints collapse into empty intervals and are skipped naturally.
inline double dual_width_sample(const ConeSpec& cone, const Eigen::Ref<const Vector>& g) {
  detail::require_length(cone, g.size(), "dual_width_sample");
  const Index n = cone.n;
  const Index k = cone.k;
  if (k == 0) return 0.0;  // D vanishes once t >= max |g_i|

  std::vector<double> brk(static_cast<std::size_t>(n - k));
  for (Index i = k; i < n; ++i) brk[static_cast<std::size_t>(i - k)] = std::fabs(g[i]);
  std::sort(brk.begin(), brk.end());

  const double support_sum = g.head(k).sum();
  double active_sum = 0.0;
  for (double b : brk) active_sum += b;

  // Walk intervals left to right; D' is continuous and nondecreasing, so the
  // first interval whose stationary point does not overshoot its right edge
  // holds the minimum (clamped to the left edge, which also covers t >= 0).
  double t_star = 0.0;
  const std::size_t nb = brk.size();
  for (std::size_t j = 0; j <= nb; ++j) {
    const double left = (j == 0) ? 0.0 : brk[j - 1];
    const double right = (j == nb) ? std::numeric_limits<double>::infinity() : brk[j];
    const double denom = static_cast<double>(k) + static_cast<double>(nb - j);
    const double stat = (support_sum + active_sum) / denom;
    if (stat <= right) {
      t_star = std::max(stat, left);
      break;
    }
    if (j < nb) active_sum -= brk[j];
  }

  // Evaluate D at the minimiser in one direct pass.
  double d = 0.0;
  for (Index i = 0; i < k; ++i) {
    const double r = g[i] - t_star;
    d += r * r;
  }
  for (Index i = k; i < n; ++i) {
    const double r = std::fabs(g[i]) - t_star;
    if (r > 0.0) d += r * r;
  }
  return std::sqrt(std::max(d, 0.0));
}

// Euclidean projection of g onto the cone {f <= 0}. KKT form:
//   w(mu)_i = g_i - mu on the support, soft-threshold(g_i, mu) elsewhere,
// with mu >= 0 the multiplier making the constraint active. The map
// mu -> f(w(mu)) is piecewise linear and non-increasing (strictly, slope
// <= -k, once k >= 1), so the multiplier is found by bisection.
inline Vector project_cone(const ConeSpec& cone, const Eigen::Ref<const Vector>& g) {
  detail::require_length(cone, g.size(), "project_cone");
  const Index n = cone.n;
  const Index k = cone.k;

  if (descent_value(cone, g) <= 0.0) return g;  // already feasible, mu = 0

  if (k == 0) return Vector::Zero(n);  // the cone degenerates to {0}

  auto constraint_at = [&](double mu) {
    double v = g.head(k).sum() - static_cast<double>(k) * mu;
    for (Index i = k; i < n; ++i) {
      const double r = std::fabs(g[i]) - mu;
      if (r > 0.0) v += r;
    }
    return v;
  };

  const double support_sum = g.head(k).sum();
  double off_abs_sum = 0.0;
  double off_abs_max = 0.0;
  for (Index i = k; i < n; ++i) {
    const double a = std::fabs(g[i]);
    off_abs_sum += a;
    off_abs_max = std::max(off_abs_max, a);
  }
  double hi = std::max(off_abs_max, (support_sum + off_abs_sum) / static_cast<double>(k)) + 1.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (constraint_at(mid) > 0.0 ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);

  Vector w(n);
  for (Index i = 0; i < k; ++i) w[i] = g[i] - mu;
  for (Index i = k; i < n; ++i) {
    const double r = std::fabs(g[i]) - mu;
    w[i] = r > 0.0 ? (g[i] > 0.0 ? r : -r) : 0.0;
  }
  return w;
}

// One draw of the width w(f, g) = max_{w in S} g'w, computed as the norm of
// the cone projection. When the projection is the zero vector the maximum
// over S is nonpositive; the sample is reported as 0 with a flag, which is
// harmless downstream since every use compares against sqrt(m) >= 0.
struct WidthSample {
  double value = 0.0;
  bool zero_projection = false;
};

inline WidthSample width_sample(const ConeSpec& cone, const Eigen::Ref<const Vector>& g) {
  const Vector w = project_cone(cone, g);
  const double norm = w.norm();
  if (norm <= 0.0) return {0.0, true};
  return {norm, false};
}

enum class WidthKind { Dual, Projection };  // xi(f, g) vs w(f, g) samples

inline const char* width_kind_name(WidthKind kind) {
  return kind == WidthKind::Dual ? "xi" : "w";
}

struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double sample_std = 0.0;
  std::int64_t num_samples = 0;
  WidthKind kind = WidthKind::Dual;
  double concentration_ratio = 0.0;  // sample_std / mean; +inf when mean == 0
};

// Per-sample values for i.i.d. N(0, I_n) draws. Sample i always uses the
// stream derive_seed(seed, i), so the result is bit-identical for any
// worker count or schedule.
inline std::vector<double> width_samples(const ConeSpec& cone, WidthKind kind,
                                         std::int64_t num_samples, std::uint64_t seed,
                                         int jobs = 1) {
  cone.validate();
  if (num_samples < 1) throw DomainError("width_samples: num_samples must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(num_samples));
  parallel_for(values.size(), jobs, [&](std::size_t i) {
    const Vector g = sample_gaussian_vector(cone.n, derive_seed(seed, i));
    values[i] = (kind == WidthKind::Dual) ? dual_width_sample(cone, g)
                                          : width_sample(cone, g).value;
  });
  return values;
}

inline WidthEstimate estimate_width(const ConeSpec& cone, WidthKind kind,
                                    std::int64_t num_samples, std::uint64_t seed,
                                    int jobs = 1) {
  if (num_samples < 2) throw DomainError("estimate_width: num_samples must be >= 2");
  const std::vector<double> values = width_samples(cone, kind, num_samples, seed, jobs);

  // Sequential fold in sample order: identical output for any job count.
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(num_samples);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sample_std = std::sqrt(ss / static_cast<double>(num_samples - 1));

  WidthEstimate est;
  est.mean = mean;
  est.sample_std = sample_std;
  est.std_error = sample_std / std::sqrt(static_cast<double>(num_samples));
  est.num_samples = num_samples;
  est.kind = kind;
  est.concentration_ratio =
      mean > 0.0 ? sample_std / mean : std::numeric_limits<double>::infinity();
  return est;
}

struct ConcentrationReport {
  double mean = 0.0;
  double sample_std = 0.0;
  double ratio = 0.0;  // +inf sentinel when mean == 0
};

inline ConcentrationReport concentration_report(const ConeSpec& cone, WidthKind kind,
                                                std::int64_t num_samples, std::uint64_t seed,
                                                int jobs = 1) {
  const WidthEstimate est = estimate_width(cone, kind, num_samples, seed, jobs);
  return {est.mean, est.sample_std, est.concentration_ratio};
}

}  // namespace meshtrap
