#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "meshtrap/errors.hpp"
#include "meshtrap/rng.hpp"

namespace meshtrap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Dense matrix with i.i.d. standard normal entries plus the seed it was
// drawn from, so any experiment can be replayed from its record.
struct GaussianMatrix {
  Matrix entries;
  std::uint64_t seed = 0;

  Index rows() const { return entries.rows(); }
  Index cols() const { return entries.cols(); }
};

// Entries are filled row by row from a single stream, so the layout of the
// draw is part of the reproducibility contract.
inline GaussianMatrix sample_gaussian(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw DomainError("sample_gaussian: dimensions must be >= 1");
  GaussianMatrix out{Matrix(m, n), seed};
  Rng rng(seed);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) out.entries(i, j) = rng.normal();
  }
  return out;
}

inline Vector sample_gaussian_vector(Index n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_gaussian_vector: length must be >= 1");
  Vector g(n);
  Rng rng(seed);
  for (Index i = 0; i < n; ++i) g[i] = rng.normal();
  return g;
}

// Orthonormal basis of {w : A w = 0} for a full-row-rank A (m < n).
struct NullBasis {
  Matrix basis;  // n x (n - m), B^T B = I, A B = 0

  Index ambient_dim() const { return basis.rows(); }
  Index null_dim() const { return basis.cols(); }
};

// Householder QR of A^T; the trailing n-m columns of Q span the null space.
inline NullBasis null_space_basis(const GaussianMatrix& A) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (m >= n) throw DomainError("null_space_basis: requires m < n");

  Eigen::HouseholderQR<Matrix> qr(A.entries.transpose());
  const Vector rdiag = qr.matrixQR().diagonal().head(m).cwiseAbs();
  const double dmax = rdiag.maxCoeff();
  if (!(dmax > 0.0) || rdiag.minCoeff() <= 1e-12 * static_cast<double>(n) * dmax) {
    throw RankError("null_space_basis: matrix is numerically rank deficient");
  }

  Matrix selector = Matrix::Zero(n, n - m);
  selector.bottomRows(n - m).setIdentity();
  return NullBasis{qr.householderQ() * selector};
}

// Cholesky factor of a symmetric positive-definite matrix, with solves.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const Matrix& M) : llt_(M) {
    if (llt_.info() != Eigen::Success) {
      throw FactorError("cholesky_spd: matrix is not positive definite");
    }
  }

  Matrix lower() const { return llt_.matrixL(); }
  Vector solve(const Vector& b) const { return llt_.solve(b); }
  void solve_in_place(Vector& b) const { llt_.solveInPlace(b); }

 private:
  Eigen::LLT<Matrix> llt_;
};

inline CholeskyFactor cholesky_spd(const Matrix& M) {
  if (M.rows() != M.cols()) throw DomainError("cholesky_spd: matrix must be square");
  const double scale = M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale)) {
    throw DomainError("cholesky_spd: matrix must be symmetric");
  }
  return CholeskyFactor(M);
}

}  // namespace meshtrap
