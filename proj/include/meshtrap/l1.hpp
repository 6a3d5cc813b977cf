#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "meshtrap/cone.hpp"
#include "meshtrap/errors.hpp"
#include "meshtrap/geometry.hpp"
#include "meshtrap/linalg.hpp"
#include "meshtrap/rng.hpp"
#include "meshtrap/trap.hpp"

namespace meshtrap {

struct BasisPursuitOptions {
  double splitting = 1.0;       // ADMM penalty parameter
  double over_relaxation = 1.8;
  double tolerance = 1e-9;      // relative primal/dual residual target
  long max_iterations = 50000;
};

struct BasisPursuitResult {
  Vector x;  // best feasible iterate seen (smallest l1 norm)
  long iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

// min ||x||_1 s.t. A x = y by alternating-direction splitting: the x-step
// projects onto the affine constraint through a cached Cholesky of A A^T,
// the z-step soft-thresholds. Every x iterate is feasible, so the returned
// vector is the feasible iterate with the smallest objective.
inline BasisPursuitResult solve_basis_pursuit(const Matrix& A, const Vector& y,
                                              const BasisPursuitOptions& opts = {}) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (y.size() != m) throw DomainError("solve_basis_pursuit: size mismatch between A and y");
  if (m > n) throw DomainError("solve_basis_pursuit: requires m <= n");

  std::optional<CholeskyFactor> gram;
  try {
    gram.emplace(Matrix(A * A.transpose()));
  } catch (const FactorError&) {
    throw RankError("solve_basis_pursuit: A A^T is numerically singular");
  }
  const Matrix At = A.transpose();
  const Vector least_norm = At * gram->solve(y);

  const double rho = opts.splitting;
  const double relax = opts.over_relaxation;
  const double kappa = 1.0 / rho;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  Vector x = least_norm;
  Vector z = x, u = Vector::Zero(n);
  Vector v(n), xr(n), z_old(n), aw(m);

  BasisPursuitResult out;
  out.x = x;
  double best_obj = x.lpNorm<1>();

  for (long it = 1; it <= opts.max_iterations; ++it) {
    // project z - u onto {x : A x = y}
    v = z - u;
    aw.noalias() = A * v;
    gram->solve_in_place(aw);
    x = v + least_norm;
    x.noalias() -= At * aw;

    const double obj = x.lpNorm<1>();
    if (obj < best_obj) {
      best_obj = obj;
      out.x = x;
    }

    xr = relax * x + (1.0 - relax) * z;
    z_old = z;
    v = xr + u;
    z = v.array().sign() * (v.array().abs() - kappa).max(0.0);
    u += xr - z;

    const double primal = (x - z).norm();
    const double dual = rho * (z - z_old).norm();
    out.iterations = it;
    out.primal_residual = primal;
    out.dual_residual = dual;
    const double primal_scale = sqrt_n + std::max(x.norm(), z.norm());
    const double dual_scale = sqrt_n + rho * u.norm();
    if (primal <= opts.tolerance * primal_scale && dual <= opts.tolerance * dual_scale) {
      out.converged = true;
      break;
    }
  }
  return out;
}

struct RecoveryOptions {
  BasisPursuitOptions solver;
  double success_tol = 1e-5;  // relative sup-norm separating exact recovery
};

struct RecoveryResult {
  Vector x_hat;
  Vector planted;
  bool success = false;
  double rel_err_inf = 0.0;
  long iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool solver_converged = false;
  std::string error;  // failed-trial record; empty on a clean run
};

namespace detail {

// Planted sparse vector: support on the first k coordinates, entries
// negative with |N(0,1)| magnitudes — the sign convention absorbed into the
// descent functional. Magnitudes are random on purpose; only the locations
// and signs matter for the theory.
inline Vector plant_vector(const ProblemGeometry& geom, std::uint64_t seed) {
  Rng amplitude(derive_seed(seed, 1));
  Vector planted = Vector::Zero(geom.n);
  for (Index i = 0; i < geom.k; ++i) planted[i] = -std::fabs(amplitude.normal());
  return planted;
}

inline RecoveryResult run_recovery(const GaussianMatrix& A, const ProblemGeometry& geom,
                                   std::uint64_t seed, const RecoveryOptions& opts) {
  RecoveryResult res;
  res.planted = plant_vector(geom, seed);
  const Vector y = A.entries * res.planted;
  try {
    BasisPursuitResult bp = solve_basis_pursuit(A.entries, y, opts.solver);
    res.x_hat = std::move(bp.x);
    res.iterations = bp.iterations;
    res.primal_residual = bp.primal_residual;
    res.dual_residual = bp.dual_residual;
    res.solver_converged = bp.converged;
    res.rel_err_inf = (res.x_hat - res.planted).lpNorm<Eigen::Infinity>() /
                      std::max(1.0, res.planted.lpNorm<Eigen::Infinity>());
    res.success = res.rel_err_inf <= opts.success_tol;
  } catch (const Error& err) {
    res.x_hat = Vector::Zero(geom.n);
    res.rel_err_inf = std::numeric_limits<double>::infinity();
    res.error = err.what();
  }
  return res;
}

}  // namespace detail

// One planted-recovery experiment: A ~ Gaussian(derive_seed(seed, 0)),
// y = A x~, success iff the solver output matches the planted vector in
// relative sup-norm.
inline RecoveryResult recovery_trial(const ProblemGeometry& geom, std::uint64_t seed,
                                     const RecoveryOptions& opts = {}) {
  geom.validate();
  const GaussianMatrix A = sample_gaussian(geom.m, geom.n, derive_seed(seed, 0));
  return detail::run_recovery(A, geom, seed, opts);
}

// Runs the intersection test and the recovery trial on the SAME sampled A
// (and the same planted vector), recording whether the two dichotomies
// agree. Indeterminate trap verdicts are non-comparable.
struct AgreementRecord {
  TrapVerdict trap;
  RecoveryResult recovery;
  std::optional<bool> agree;
};

inline AgreementRecord recovery_vs_trap(const ProblemGeometry& geom, std::uint64_t seed,
                                        const RecoveryOptions& rec_opts = {},
                                        const TrapOptions& trap_opts = {}) {
  geom.validate();
  const GaussianMatrix A = sample_gaussian(geom.m, geom.n, derive_seed(seed, 0));

  AgreementRecord rec;
  rec.trap = trap_test(ConeSpec{geom.n, geom.k}, null_space_basis(A), trap_opts);
  rec.recovery = detail::run_recovery(A, geom, seed, rec_opts);

  switch (rec.trap.outcome) {
    case TrapOutcome::Trapped: rec.agree = !rec.recovery.success; break;
    case TrapOutcome::Escaped: rec.agree = rec.recovery.success; break;
    default: break;
  }
  return rec;
}

}  // namespace meshtrap
