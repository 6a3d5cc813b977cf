#pragma once

#include "meshtrap/errors.hpp"
#include "meshtrap/linalg.hpp"

namespace meshtrap {

// One experiment size: ambient dimension n, measurement rows m, sparsity k.
struct ProblemGeometry {
  Index n = 0;
  Index m = 0;
  Index k = 0;

  double alpha() const { return static_cast<double>(m) / static_cast<double>(n); }
  double beta_w() const { return static_cast<double>(k) / static_cast<double>(n); }

  void validate() const {
    if (n < 1) throw DomainError("ProblemGeometry: n must be >= 1");
    if (k < 0 || k > n) throw DomainError("ProblemGeometry: k must lie in [0, n]");
    if (m < 1 || m >= n) throw DomainError("ProblemGeometry: m must lie in [1, n)");
  }
};

}  // namespace meshtrap
