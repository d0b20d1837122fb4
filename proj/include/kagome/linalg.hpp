#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

namespace kagome {

using cplx = std::complex<double>;

/// y = A x for a Hermitian operator A.
using MatVec = std::function<void(const Eigen::VectorXcd& x, Eigen::VectorXcd& y)>;

struct LanczosOptions {
  int krylov_dim = 64;
  int max_restarts = 400;
  /// Stop when ||A x - theta x|| <= tol * ||A||_est.
  double tol = 1e-11;
};

struct RitzPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;
  bool converged = false;
};

/// Smallest eigenpair of a Hermitian operator by restarted Lanczos with full
/// reorthogonalization. The search is restricted to the orthogonal
/// complement of `deflate` (assumed orthonormal). The returned Ritz value
/// never exceeds the Rayleigh quotient of `start`.
RitzPair lowest_eigenpair(const MatVec& apply, Eigen::Index n, Eigen::VectorXcd start,
                          const LanczosOptions& options = {},
                          std::span<const Eigen::VectorXcd> deflate = {});

}  // namespace kagome
