#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "kagome/linalg.hpp"
#include "kagome/topology.hpp"

namespace kagome {

/// Reduced Planck constant in J s.
inline constexpr double kHbar = 1.054571817e-34;

/// Default reference frequency Omega_R in rad/s used for reporting.
inline constexpr double kDefaultOmegaR = 1.0e7;

/// Largest photon number the dense fixed-N machinery accepts.
inline constexpr int kMaxPhotons = 8;

/// Parameters of the tight-binding cavity Hamiltonian. Energies in J.
struct HamiltonianParams {
  double omega_d = 0.0;               ///< driving frequency, rad/s
  double hbar = kHbar;                ///< J s
  std::map<Bond, double> couplings;   ///< hopping kappa per bond, J
  double mu = 0.0;                    ///< chemical potential, J
  double unit_scale = kDefaultOmegaR; ///< Omega_R, rad/s

  /// hbar * Omega_R; the reporting unit for energies.
  double energy_unit() const { return hbar * unit_scale; }
  /// Coefficient of n_k: hbar omega_d - mu.
  double onsite_energy() const { return hbar * omega_d - mu; }
  double coupling(int a, int b) const;

  /// Throws ConfigError if a bond coupling is missing or any invariant fails.
  void validate(const KagomeTopology& topology) const;

  /// All bonds share one hopping strength (J).
  static HamiltonianParams uniform(const KagomeTopology& topology, double omega_d, double kappa,
                                   double mu = 0.0, double unit_scale = kDefaultOmegaR);

  /// Same, with kappa, mu given in units of hbar*Omega_R and omega_d in units of Omega_R.
  static HamiltonianParams uniform_reduced(const KagomeTopology& topology, double omega_d_over_omega_r,
                                           double kappa_reduced, double mu_reduced = 0.0);
};

using Occupation = std::array<std::uint8_t, kNumSites>;

int total_photons(const Occupation& occ);

/// Fixed-N occupation basis in ascending lexicographic order of (n_1, ..., n_12).
class FockBasis {
 public:
  FockBasis(int n_total, std::vector<Occupation> states);

  int n_total() const { return n_total_; }
  std::size_t dimension() const { return states_.size(); }
  const Occupation& state(std::size_t i) const { return states_.at(i); }
  std::span<const Occupation> states() const { return states_; }
  std::optional<std::size_t> index(const Occupation& occ) const;

 private:
  int n_total_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> lookup_;
};

/// Number of ways to place n bosons on s sites.
std::size_t sector_dimension(int n_total, int sites = kNumSites);

FockBasis enumerate_basis(int n_total, const KagomeTopology& topology);

/// Dense Hermitian matrix in a fixed-N sector.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(Eigen::MatrixXcd matrix);

  Eigen::Index dimension() const { return matrix_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }
  /// ||H - H^dagger||_F / ||H||_F (0 for the zero matrix).
  double hermiticity_defect() const;

 private:
  Eigen::MatrixXcd matrix_;
};

/// H - mu N in the sector of `basis`; hopping elements -kappa sqrt((n_k+1) n_k').
HermitianOperator build_hamiltonian(const HamiltonianParams& params, const FockBasis& basis,
                                    const KagomeTopology& topology);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
};

/// The k_lowest smallest eigenpairs in ascending order.
std::vector<EigenPair> ed_spectrum(const HermitianOperator& h, int k_lowest);

/// <n_k> for a unit-norm sector state; entry k-1 holds site k.
std::array<double, kNumSites> local_occupations(const Eigen::VectorXcd& state, const FockBasis& basis);

/// Ground energy of the single-photon problem: the lowest eigenvalue of
/// (hbar omega_d - mu) I - K with K the weighted adjacency.
double single_photon_ground_energy(const HamiltonianParams& params, const KagomeTopology& topology);

}  // namespace kagome
