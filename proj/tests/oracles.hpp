#pragma once

// Brute-force references shared by the unit and acceptance tests. Nothing here
// calls into the library's Hamiltonian or contraction code.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "kagome/fock.hpp"
#include "kagome/peps.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Occupation digits of a product-space index (site 1 fastest).
inline std::vector<int> digits(long index, int d) {
  std::vector<int> occ(kagome::kNumSites);
  for (int k = 0; k < kagome::kNumSites; ++k) {
    occ[k] = static_cast<int>(index % d);
    index /= d;
  }
  return occ;
}

inline long encode(const std::vector<int>& occ, int d) {
  long index = 0;
  for (int k = kagome::kNumSites - 1; k >= 0; --k) index = index * d + occ[k];
  return index;
}

/// a_to^dag a_from applied to an occupation vector; returns the amplitude, 0 if annihilated.
inline double hop(std::vector<int>& occ, int to, int from, int cutoff) {
  if (occ[from - 1] == 0) return 0.0;
  double amp = std::sqrt(static_cast<double>(occ[from - 1]));
  occ[from - 1] -= 1;
  if (occ[to - 1] + 1 > cutoff) {
    occ[from - 1] += 1;
    return 0.0;
  }
  amp *= std::sqrt(static_cast<double>(occ[to - 1] + 1));
  occ[to - 1] += 1;
  return amp;
}

/// <Psi| H - mu N + lambda (N - target)^2 |Psi> in units of hbar*Omega_R over the
/// truncated product space, with H applied occupation by occupation.
inline cplx product_space_expectation(const Eigen::VectorXcd& psi, int d, const kagome::HamiltonianParams& p,
                                      const kagome::KagomeTopology& topo, double lambda, int target) {
  const double unit = p.energy_unit();
  const double c = p.onsite_energy() / unit;
  cplx sum = 0.0;
  for (long i = 0; i < psi.size(); ++i) {
    if (psi(i) == 0.0) continue;
    auto occ = digits(i, d);
    int n = 0;
    for (int x : occ) n += x;
    sum += std::norm(psi(i)) * (c * n + lambda * (n - target) * (n - target));
    for (const auto& b : topo.bonds()) {
      const double kappa = p.coupling(b.a, b.b) / unit;
      for (auto [to, from] : {std::pair{b.a, b.b}, std::pair{b.b, b.a}}) {
        auto out = occ;
        const double amp = hop(out, to, from, d - 1);
        if (amp != 0.0) sum += std::conj(psi(encode(out, d))) * (-kappa * amp) * psi(i);
      }
    }
  }
  return sum;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oracle
