#include "kagome/linalg.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "kagome/errors.hpp"

namespace kagome {

namespace {

void project_out(Eigen::VectorXcd& w, std::span<const Eigen::VectorXcd> basis) {
  for (const auto& q : basis) w -= q * q.dot(w);
}

}  // namespace

RitzPair lowest_eigenpair(const MatVec& apply, Eigen::Index n, Eigen::VectorXcd start,
                          const LanczosOptions& options, std::span<const Eigen::VectorXcd> deflate) {
  if (n <= 0) throw ArgumentError("lanczos: empty operator");
  if (start.size() != n) throw ArgumentError("lanczos: start vector has wrong dimension");

  project_out(start, deflate);
  project_out(start, deflate);
  double start_norm = start.norm();
  if (!(start_norm > 0.0) || !std::isfinite(start_norm)) {
    // Deterministic fallback direction.
    start = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) start(i) = cplx(1.0 + 0.1 * std::sin(1.0 + i), 0.3 * std::cos(2.0 + i));
    project_out(start, deflate);
    start_norm = start.norm();
    if (!(start_norm > 0.0)) throw NumericalError("lanczos: deflation exhausted the space");
  }
  Eigen::VectorXcd v = start / start_norm;

  const Eigen::Index free_dim = n - static_cast<Eigen::Index>(deflate.size());
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options.krylov_dim, std::max<Eigen::Index>(free_dim, 1)));

  RitzPair best;
  best.value = std::numeric_limits<double>::infinity();
  Eigen::VectorXcd w(n);
  double anorm = 0.0;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(m_max + 1);
    basis.push_back(v);
    std::vector<double> alpha;
    std::vector<double> beta;
    double last_beta = 0.0;

    for (int j = 0; j < m_max; ++j) {
      apply(basis[j], w);
      project_out(w, deflate);
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) w -= q * q.dot(w);
        project_out(w, deflate);
      }
      last_beta = w.norm();
      anorm = std::max(anorm, std::abs(a) + last_beta);
      if (j + 1 == m_max) break;
      if (last_beta <= 1e-14 * std::max(anorm, std::numeric_limits<double>::min())) {
        last_beta = 0.0;
        break;
      }
      beta.push_back(last_beta);
      basis.push_back(w / last_beta);
    }

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const double theta = small.eigenvalues()(0);
    const Eigen::VectorXd s = small.eigenvectors().col(0);
    anorm = std::max(anorm, small.eigenvalues().cwiseAbs().maxCoeff());

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < m; ++i) x += s(i) * basis[i];
    x.normalize();
    const double est_residual = std::abs(last_beta * s(m - 1));

    best.value = theta;
    best.vector = x;
    best.residual = est_residual;
    v = x;
    if (est_residual <= options.tol * std::max(anorm, std::numeric_limits<double>::min())) {
      // Confirm with an explicit residual.
      apply(x, w);
      project_out(w, deflate);
      const double rq = x.dot(w).real();
      const double res = (w - rq * x).norm();
      best.value = rq;
      best.residual = res;
      if (res <= 10.0 * options.tol * std::max(anorm, std::numeric_limits<double>::min()) || m >= free_dim) {
        best.converged = true;
        return best;
      }
    }
  }
  return best;
}

}  // namespace kagome
