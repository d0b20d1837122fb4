#pragma once

#include <optional>
#include <vector>

#include "kagome/disorder.hpp"
#include "kagome/fock.hpp"
#include "kagome/peps.hpp"

namespace kagome {

/// Lowest eigenvalue of H - mu N in the N sector, in J.
double sector_ground_energy(const HamiltonianParams& params, int n_total, const KagomeTopology& topology);

struct DisorderBounds {
  int n_total = 0;
  double e_kappa1 = 0.0;  ///< uniform kappa1, expected upper bound (J)
  double e_kappa2 = 0.0;  ///< uniform kappa2, expected lower bound (J)
  std::vector<double> energies;
  std::vector<std::uint64_t> seeds;
  /// Realization indices outside [e_kappa2, e_kappa1] beyond roundoff.
  std::vector<int> violations;
};

DisorderBounds disorder_energy_bounds(const DisorderSpec& spec, int n_total, const HamiltonianParams& base,
                                      const KagomeTopology& topology, int jobs = 1);

enum class ScanAxis { mu, kappa };

struct WindowBoundary {
  double lower = 0.0;  ///< last grid value with the old sector
  double upper = 0.0;  ///< first grid value with the new sector
  int from = 0;
  int to = 0;
};

struct ScanResult {
  ScanAxis axis = ScanAxis::mu;
  std::vector<double> grid;
  int n_min = 0;
  int n_max = 0;
  /// energies[p][n - n_min] = lowest eigenvalue of H - mu N in sector n at point p (J).
  std::vector<std::vector<double>> energies;
  std::vector<int> n_star;
  std::vector<WindowBoundary> boundaries;
  /// Grid indices where two sectors tied and the smaller N was taken.
  std::vector<int> ties;

  /// Span of grid values selecting sector n (0 if never selected).
  double window_width(int n) const;
};

/// For each grid value (mu or uniform kappa, in J) picks N* minimizing the
/// sector energy of H - mu N; ties go to the smaller N.
ScanResult fixed_n_window_scan(ScanAxis axis, const std::vector<double>& grid, const HamiltonianParams& base,
                               int n_min, int n_max, const KagomeTopology& topology, int jobs = 1);

struct BenchmarkRow {
  int n_total = 0;
  int bond_dim = 0;
  double peps_energy = 0.0;  ///< hbar*Omega_R
  double ed_energy = 0.0;    ///< hbar*Omega_R
  double difference = 0.0;
  int sweeps = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct BenchmarkOptions {
  /// Cap applied to N >= 3; smaller N run uncapped (D = d^2).
  int capped_bond_dim = 6;
  int cap_from_n = 3;
  std::uint64_t seed = 1;
  int max_sweeps = 200;
  double convergence_tol = 1e-8;
};

struct BenchmarkResult {
  std::vector<BenchmarkRow> rows;
  /// ED ground energy versus N over the benchmarked N.
  LinearFit ed_fit;
};

BenchmarkResult benchmark_peps_vs_ed(const std::vector<int>& n_values, const HamiltonianParams& params,
                                     const KagomeTopology& topology, const BenchmarkOptions& options = {});

}  // namespace kagome
