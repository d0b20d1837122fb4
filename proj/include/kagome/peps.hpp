#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "kagome/fock.hpp"
#include "kagome/topology.hpp"

namespace kagome {

// Energies inside this module are in units of hbar*Omega_R.

struct PepsConfig {
  int n_total = 1;
  int phys_dim = 2;
  std::map<Bond, int> bond_dims;
  int bond_cap = 4;
  std::uint64_t seed = 1;
  double convergence_tol = 1e-8;
  int max_sweeps = 200;
  double regularization_eps = 1e-10;
  /// Weight of the (N - n_total)^2 term; nullopt picks a weight large enough
  /// to make the target sector the penalized ground sector. 0 disables it.
  std::optional<double> number_penalty;

  /// Ring bonds get min(d, cap), hexagon chords get cap (default d^2).
  static PepsConfig for_photons(int n_total, const KagomeTopology& topology,
                                std::optional<int> bond_cap = std::nullopt, std::uint64_t seed = 1);

  int bond_dim(int a, int b) const;
  void validate(const KagomeTopology& topology) const;
};

/// Leg order of every site tensor.
enum Leg : int { kPhys = 0, kRingPrev = 1, kRingNext = 2, kHexPrev = 3, kHexNext = 4 };

/// Rank-5 tensor A[i, ring_prev, ring_next, hex_prev, hex_next], stored flat
/// with the physical index fastest. Hex legs of outer sites have dimension 1.
struct PepsTensor {
  int site = 0;
  std::array<int, 5> dims{};
  Eigen::VectorXcd data;

  std::size_t size() const;
  Eigen::Index index(int i, int rp, int rn, int hp, int hn) const;
  std::complex<double>& operator()(int i, int rp, int rn, int hp, int hn) { return data(index(i, rp, rn, hp, hn)); }
  std::complex<double> operator()(int i, int rp, int rn, int hp, int hn) const { return data(index(i, rp, rn, hp, hn)); }
};

/// Leg dimensions of the tensor at site k under `config`.
std::array<int, 5> tensor_dims(const PepsConfig& config, int k);

struct PepsState {
  KagomeTopology topology;
  PepsConfig config;
  std::array<PepsTensor, kNumSites> tensors;
  /// Seed actually used after zero-norm retries.
  std::uint64_t seed_used = 0;

  PepsTensor& at(int k) { return tensors.at(k - 1); }
  const PepsTensor& at(int k) const { return tensors.at(k - 1); }
};

PepsState init_random(const PepsConfig& config, const KagomeTopology& topology);

/// Product state with site k in occupation occ[k-1]; all virtual dims 1.
PepsState product_state(const Occupation& occ, int phys_dim, const KagomeTopology& topology);

/// Single-site operator insertions keyed by site; a hopping term a_k^dag a_k'
/// is inserted as two factors.
using Insertions = std::map<int, Eigen::MatrixXcd>;

/// Exact <bra| prod_k O_k |ket>.
std::complex<double> contract_scalar(const PepsState& bra, const PepsState& ket, const Insertions& insertions = {});

/// Truncated ladder matrices of size d x d.
Eigen::MatrixXcd annihilation(int d);
Eigen::MatrixXcd creation(int d);
Eigen::MatrixXcd number_operator(int d);

/// Coefficients over prod_k {0..d-1}, site 1 fastest. Requires d <= 3.
Eigen::VectorXcd peps_to_statevector(const PepsState& state);

/// Restriction of a full product-space vector to a fixed-N sector basis.
Eigen::VectorXcd project_to_sector(const Eigen::VectorXcd& full, int phys_dim, const FockBasis& basis);

/// Effective number-penalty weight used for (params, config).
double number_penalty_weight(const PepsConfig& config, const HamiltonianParams& params);

struct GevpSolution {
  double xi = 0.0;
  Eigen::VectorXcd a;
  double deviation = 0.0;
  /// Some directions of N_eff fell below eps * lambda_max and were dropped.
  bool regularized = false;
  int kept = 0;
  /// lambda_max / lambda_min over the kept subspace.
  double condition = 1.0;
};

struct LocalEigProblem {
  int site = 0;
  int phys_dim = 1;
  Eigen::MatrixXcd h_eff;
  Eigen::MatrixXcd n_eff;
  /// N_eff = norm_env (x) I_d when set; lets the solver diagonalize the small factor.
  std::optional<Eigen::MatrixXcd> norm_env;
  std::optional<GevpSolution> solution;
};

/// Local pair for the penalized H - mu N + lambda (N - n_total)^2.
LocalEigProblem build_effective_pair(const PepsState& state, const HamiltonianParams& params, int k);

/// Smallest generalized eigenpair of (H_eff, N_eff) on the subspace where N_eff
/// eigenvalues exceed eps * lambda_max. The returned vector satisfies A^dag N_eff A = 1.
GevpSolution solve_local_gevp(const LocalEigProblem& problem, double eps,
                              const Eigen::VectorXcd* warm_start = nullptr);

/// <H - mu N + lambda (N - n_total)^2> / <Psi|Psi>.
double peps_energy(const PepsState& state, const HamiltonianParams& params);

struct SolveRecord {
  int site = 0;
  double xi = 0.0;
  double deviation = 0.0;
  double condition = 1.0;
  bool regularized = false;
  bool reinitialized = false;
  /// The solve did not lower the energy and the previous tensor was kept.
  bool rejected = false;
};

struct SweepRecord {
  int sweep = 0;
  double energy = 0.0;
  double min_xi = 0.0;
  double max_deviation = 0.0;
  bool regularized = false;
  bool reinitialized = false;
  std::vector<SolveRecord> solves;
};

/// One pass 1 -> 12 followed by 12 -> 1.
SweepRecord full_sweep(PepsState& state, const HamiltonianParams& params, int sweep_number = 1);

struct TraceRow {
  int sweep = 0;
  double energy = 0.0;
  double delta_e = 0.0;
  double max_deviation = 0.0;
  bool regularized = false;
  bool reinitialized = false;
};

struct OptimizationTrace {
  std::vector<TraceRow> rows;
  std::vector<SweepRecord> sweeps;
  bool converged = false;
};

struct OptimizationResult {
  PepsState state;
  OptimizationTrace trace;
  double energy = 0.0;
};

/// Two-site gauge fixing on every bond; leaves the state unchanged.
void balance_bonds(PepsState& state);

/// Rescales all tensors so that <Psi|Psi> = 1.
void normalize(PepsState& state);

OptimizationResult optimize(const PepsConfig& config, const HamiltonianParams& params,
                            const KagomeTopology& topology);

/// <n_k> / <Psi|Psi> for every site.
std::array<double, kNumSites> peps_local_occupations(const PepsState& state);

}  // namespace kagome
