#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "meshtrap/cone.hpp"
#include "meshtrap/errors.hpp"
#include "meshtrap/geometry.hpp"
#include "meshtrap/linalg.hpp"
#include "meshtrap/parallel.hpp"
#include "meshtrap/rng.hpp"

namespace meshtrap {

enum class TrapOutcome { Trapped, Escaped, Indeterminate };

inline const char* trap_outcome_name(TrapOutcome o) {
  switch (o) {
    case TrapOutcome::Trapped: return "trapped";
    case TrapOutcome::Escaped: return "escaped";
    default: return "indeterminate";
  }
}

struct TrapVerdict {
  TrapOutcome outcome = TrapOutcome::Indeterminate;
  // Best value of the descent functional found on the null-space ball.
  double objective = 0.0;
  // Present iff Trapped: unit vector in the null space with f(witness) <= -margin.
  std::optional<Vector> witness;
  long iterations = 0;
  double margin = 0.0;
};

struct TrapOptions {
  long max_iterations = 20000;
  double step_scale = 0.5;
  // Decision margin is margin_scale * sqrt(n); the dichotomy is asymptotic,
  // so near the phase boundary finite-n instances legitimately come out
  // Indeterminate rather than being forced into a binary answer.
  double margin_scale = 1e-4;
  // Scheduling knobs: a short subgradient burst settles most trapped
  // instances before the escape certificate is attempted.
  long probe_iterations = 1000;
  long certificate_iterations = 2000;
};

namespace detail {

// Escape certificate: find s with s_i = 1 on the support, |s_i| <= 1 off it,
// and || B^T s || <= tol. Such an s minorises the descent functional, so
//   min over the null-space ball of f  >=  -|| B^T s ||.
// The search minimises 0.5 || B^T s ||^2 over the box by accelerated
// projected gradient; B^T B = I makes 1 a valid step size.
inline bool escape_certificate(const ConeSpec& cone, const Matrix& basis, double tol,
                               long max_iters, long* iters_used) {
  const Index n = cone.n;
  const Index k = cone.k;
  Vector s(n);
  s.head(k).setOnes();
  s.tail(n - k).setZero();
  if (k == 0) {
    *iters_used = 0;
    return true;  // s = 0 lies in the box and certifies min >= 0
  }

  Vector y = s;
  Vector coeff(basis.cols()), grad(n), s_prev(n);
  double momentum = 1.0;
  double best = std::numeric_limits<double>::infinity();
  long stale = 0;
  for (long it = 1; it <= max_iters; ++it) {
    coeff.noalias() = basis.transpose() * y;
    grad.noalias() = basis * coeff;
    s_prev = s;
    s = y - grad;
    s.head(k).setOnes();
    s.tail(n - k) = s.tail(n - k).cwiseMax(-1.0).cwiseMin(1.0);

    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = s + ((momentum - 1.0) / momentum_next) * (s - s_prev);
    momentum = momentum_next;

    if (it % 10 == 0 || it == max_iters) {
      const double r = (basis.transpose() * s).norm();
      if (r <= tol) {
        *iters_used = it;
        return true;
      }
      if (r < 0.99 * best) {
        best = r;
        stale = 0;
      } else if (++stale >= 20 && r > 20.0 * tol) {
        break;  // stagnating far from the target; not certifiable
      }
    }
  }
  *iters_used = max_iters;
  return false;
}

}  // namespace detail

// Sign test for min f(w) over {A w = 0, ||w||_2 <= 1}, the ball relaxation of
// the sphere program; degree-1 homogeneity makes the two signs agree. The
// convex objective z -> f(B z) is minimised by projected subgradient with the
// problem scaled by 1/sqrt(n) so values, subgradients and the step rule
// c/sqrt(t) all live on an O(1) scale.
//
// Verdicts: Trapped when a point with f <= -margin is found (witness
// returned, renormalised to the sphere); Escaped when the certificate proves
// min >= -margin/4; Indeterminate otherwise. The certificate is conservative:
// when it cannot be established the verdict is never a silent Escaped.
inline TrapVerdict trap_test(const ConeSpec& cone, const NullBasis& null_basis,
                             const TrapOptions& opts = {}) {
  cone.validate();
  const Matrix& B = null_basis.basis;
  if (B.rows() != cone.n) throw DomainError("trap_test: basis/cone dimension mismatch");
  const Index n = cone.n;
  const Index k = cone.k;
  const double scale = std::sqrt(static_cast<double>(n));
  const double margin = opts.margin_scale * scale;   // on the unscaled f
  const double margin_s = opts.margin_scale;         // on f / sqrt(n)

  TrapVerdict verdict;
  verdict.margin = margin;

  Vector z = Vector::Zero(B.cols());
  Vector z_best = z;
  Vector w(n), subgrad(n), step_dir(B.cols());
  double best = 0.0;  // f(B*0)/sqrt(n) = 0
  long iters = 0;
  bool trapped = false;

  auto subgradient_pass = [&](long from, long upto) {
    for (long t = from; t <= upto; ++t) {
      ++iters;
      w.noalias() = B * z;
      const double val = descent_value(cone, w) / scale;
      if (val < best) {
        best = val;
        z_best = z;
        if (best <= -margin_s) return true;
      }
      // subgradient of f at w, scaled
      subgrad.head(k).setConstant(1.0 / scale);
      for (Index i = k; i < n; ++i) {
        subgrad[i] = w[i] > 0.0 ? 1.0 / scale : (w[i] < 0.0 ? -1.0 / scale : 0.0);
      }
      step_dir.noalias() = B.transpose() * subgrad;
      const double gnorm = step_dir.norm();
      if (gnorm == 0.0) return false;  // stationary; nothing below 0 from here
      z -= (opts.step_scale / std::sqrt(static_cast<double>(t))) * step_dir;
      const double znorm = z.norm();
      if (znorm > 1.0) z /= znorm;
    }
    return false;
  };

  const long probe = std::min(opts.probe_iterations, opts.max_iterations);
  trapped = subgradient_pass(1, probe);

  if (!trapped) {
    long cert_iters = 0;
    const bool certified = detail::escape_certificate(
        cone, B, margin / 4.0, opts.certificate_iterations, &cert_iters);
    iters += cert_iters;
    if (certified) {
      verdict.outcome = TrapOutcome::Escaped;
      verdict.objective = best * scale;
      verdict.iterations = iters;
      return verdict;
    }
    trapped = subgradient_pass(probe + 1, opts.max_iterations);
  }

  verdict.iterations = iters;
  verdict.objective = best * scale;
  if (trapped || best * scale <= -margin) {
    w.noalias() = B * z_best;
    const double wnorm = w.norm();
    verdict.outcome = TrapOutcome::Trapped;
    verdict.witness = w / wnorm;  // degree 1: f(w/||w||) = f(w)/||w|| <= -margin
  } else {
    verdict.outcome = TrapOutcome::Indeterminate;
  }
  return verdict;
}

struct TrapStats {
  long trials = 0;
  long trapped = 0;
  long escaped = 0;
  long indeterminate = 0;
  double rate = 0.0;         // trapped / trials
  double wilson_low = 0.0;   // 95% Wilson interval for the trapped rate
  double wilson_high = 0.0;
};

inline void wilson_interval(long successes, long trials, double* low, double* high) {
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = p + z2 / (2.0 * nn);
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  *low = successes == 0 ? 0.0 : std::clamp((center - half) / denom, 0.0, 1.0);
  *high = successes == trials ? 1.0 : std::clamp((center + half) / denom, 0.0, 1.0);
}

// Empirical intersection rate over independent Gaussian null spaces.
inline TrapStats trap_probability(const ProblemGeometry& geom, long trials,
                                  std::uint64_t seed, int jobs = 1,
                                  const TrapOptions& opts = {}) {
  geom.validate();
  if (trials < 1) throw DomainError("trap_probability: trials must be >= 1");
  std::vector<TrapOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_for(outcomes.size(), jobs, [&](std::size_t i) {
    const GaussianMatrix A = sample_gaussian(geom.m, geom.n, derive_seed(seed, i));
    const NullBasis B = null_space_basis(A);
    outcomes[i] = trap_test(ConeSpec{geom.n, geom.k}, B, opts).outcome;
  });
  TrapStats stats;
  stats.trials = trials;
  for (TrapOutcome o : outcomes) {
    if (o == TrapOutcome::Trapped) ++stats.trapped;
    else if (o == TrapOutcome::Escaped) ++stats.escaped;
    else ++stats.indeterminate;
  }
  stats.rate = static_cast<double>(stats.trapped) / static_cast<double>(trials);
  wilson_interval(stats.trapped, trials, &stats.wilson_low, &stats.wilson_high);
  return stats;
}

}  // namespace meshtrap
