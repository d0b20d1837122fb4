#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kagome/disorder.hpp"
#include "kagome/fock.hpp"

namespace kagome {

enum class InitialKind { localized, superposition, custom };

struct InitialStateSpec {
  InitialKind kind = InitialKind::localized;
  int site = 1;
  int photons = 2;
  /// Relative phase of the split branch of the superposition.
  double phase = 0.0;
  /// Superposition sites: (2 at a) + (2 at b) + e^{i phase} (1 at a, 1 at b), all / sqrt(3).
  int site_a = 1;
  int site_b = 7;
  std::vector<std::pair<Occupation, cplx>> amplitudes;

  static InitialStateSpec localized(int site, int photons);
  static InitialStateSpec superposition(double phase, int site_a = 1, int site_b = 7);
  /// Amplitudes are normalized on construction of the vector.
  static InitialStateSpec custom(std::vector<std::pair<Occupation, cplx>> amplitudes);

  /// Photon number of the sector this state lives in.
  int photon_number() const;
  std::string describe() const;
};

Eigen::VectorXcd build_initial_state(const InitialStateSpec& spec, const FockBasis& basis);

/// Dimensionless times tau = Omega_R t.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_samples = 2;

  void validate() const;
  double at(int i) const;
  std::vector<double> times() const;
};

/// Full eigendecomposition of a sector Hamiltonian, reused for every time sample.
class SpectralPropagator {
 public:
  /// `energy_unit` converts eigenvalues (J) to hbar*Omega_R so that phases are E tau / (hbar Omega_R).
  SpectralPropagator(const HermitianOperator& h, double energy_unit);

  Eigen::Index dimension() const { return values_.size(); }
  const Eigen::VectorXd& reduced_energies() const { return values_; }
  const Eigen::MatrixXcd& eigenvectors() const { return vectors_; }

  Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi0, double tau) const;
  std::vector<Eigen::VectorXcd> evolve(const Eigen::VectorXcd& psi0, const TimeGrid& grid) const;

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXcd vectors_;
};

std::vector<Eigen::VectorXcd> spectral_evolve(const HermitianOperator& h, const Eigen::VectorXcd& psi0,
                                              const TimeGrid& grid, double energy_unit = kHbar * kDefaultOmegaR);

struct CorrelationSeries {
  int k = 1;
  int k_prime = 1;
  std::vector<double> times;
  std::vector<double> values;
  /// Couplings, seed and initial state, as printable key/value pairs.
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// G_{k,k'}(t) = <Psi(t)| n_k n_k' |Psi(t)> over the grid.
CorrelationSeries correlation(int k, int k_prime, const std::vector<Eigen::VectorXcd>& states,
                              const TimeGrid& grid, const FockBasis& basis);

/// <n_k>(t) for every site; rows are samples.
Eigen::MatrixXd occupation_series(const std::vector<Eigen::VectorXcd>& states, const FockBasis& basis);

/// Global maximum minus global minimum.
double contrast(const CorrelationSeries& series);
double peak_value(const CorrelationSeries& series);
/// Time of the first interior local maximum reaching half the global maximum.
double first_peak_time(const CorrelationSeries& series);

struct DisorderCorrelation {
  std::vector<CorrelationSeries> realizations;
  std::vector<std::uint64_t> seeds;
  CorrelationSeries mean;
};

/// One evolution per realization of `disorder`, plus the ensemble mean.
DisorderCorrelation disorder_correlation(const InitialStateSpec& initial, int k, int k_prime,
                                         const DisorderSpec& disorder, const HamiltonianParams& base,
                                         const TimeGrid& grid, const KagomeTopology& topology, int jobs = 1);

}  // namespace kagome
