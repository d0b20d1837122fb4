#include "kagome/fock.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "kagome/errors.hpp"

namespace kagome {

namespace {

// Dense complex storage for anything larger would exceed a few GB.
constexpr std::size_t kMaxDenseDimension = 12376;

void enumerate(int site, int remaining, Occupation& current, std::vector<Occupation>& out) {
  if (site == kNumSites - 1) {
    current[site] = static_cast<std::uint8_t>(remaining);
    out.push_back(current);
    return;
  }
  for (int n = 0; n <= remaining; ++n) {
    current[site] = static_cast<std::uint8_t>(n);
    enumerate(site + 1, remaining - n, current, out);
  }
}

}  // namespace

double HamiltonianParams::coupling(int a, int b) const {
  auto it = couplings.find(make_bond(a, b));
  if (it == couplings.end()) {
    throw ConfigError("no coupling for bond (" + std::to_string(a) + "," + std::to_string(b) + ")");
  }
  return it->second;
}

void HamiltonianParams::validate(const KagomeTopology& topology) const {
  if (!(omega_d > 0.0)) throw ConfigError("omega_d must be > 0");
  if (!(unit_scale > 0.0)) throw ConfigError("unit_scale must be > 0");
  if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
  if (!std::isfinite(mu)) throw ConfigError("mu must be finite");
  for (const Bond& b : topology.bonds()) {
    const double kappa = coupling(b.a, b.b);
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
      throw ConfigError("coupling on bond (" + std::to_string(b.a) + "," + std::to_string(b.b) +
                        ") must be real and >= 0");
    }
  }
}

HamiltonianParams HamiltonianParams::uniform(const KagomeTopology& topology, double omega_d,
                                             double kappa, double mu, double unit_scale) {
  HamiltonianParams p;
  p.omega_d = omega_d;
  p.mu = mu;
  p.unit_scale = unit_scale;
  for (const Bond& b : topology.bonds()) p.couplings[b] = kappa;
  return p;
}

HamiltonianParams HamiltonianParams::uniform_reduced(const KagomeTopology& topology,
                                                     double omega_d_over_omega_r, double kappa_reduced,
                                                     double mu_reduced) {
  const double unit = kHbar * kDefaultOmegaR;
  return uniform(topology, omega_d_over_omega_r * kDefaultOmegaR, kappa_reduced * unit, mu_reduced * unit);
}

int total_photons(const Occupation& occ) {
  return std::accumulate(occ.begin(), occ.end(), 0);
}

FockBasis::FockBasis(int n_total, std::vector<Occupation> states)
    : n_total_(n_total), states_(std::move(states)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (total_photons(states_[i]) != n_total_) throw SectorError("basis state outside the fixed-N sector");
    lookup_.emplace(states_[i], i);
  }
}

std::optional<std::size_t> FockBasis::index(const Occupation& occ) const {
  auto it = lookup_.find(occ);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t sector_dimension(int n_total, int sites) {
  // C(n + sites - 1, sites - 1)
  std::size_t result = 1;
  for (int i = 1; i < sites; ++i) result = result * static_cast<std::size_t>(n_total + i) / i;
  return result;
}

FockBasis enumerate_basis(int n_total, const KagomeTopology& topology) {
  if (n_total < 0 || n_total > kMaxPhotons) {
    throw CapacityError("photon number " + std::to_string(n_total) + " outside the supported range 0.." +
                        std::to_string(kMaxPhotons));
  }
  if (topology.num_sites() != kNumSites) throw ConfigError("basis requires a 12-site cell");
  std::vector<Occupation> states;
  states.reserve(sector_dimension(n_total));
  Occupation current{};
  enumerate(0, n_total, current, states);
  return FockBasis(n_total, std::move(states));
}

HermitianOperator::HermitianOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) throw ArgumentError("operator matrix must be square");
}

double HermitianOperator::hermiticity_defect() const {
  const double scale = matrix_.norm();
  if (scale == 0.0) return 0.0;
  return (matrix_ - matrix_.adjoint()).norm() / scale;
}

HermitianOperator build_hamiltonian(const HamiltonianParams& params, const FockBasis& basis,
                                    const KagomeTopology& topology) {
  params.validate(topology);
  const std::size_t dim = basis.dimension();
  if (dim > kMaxDenseDimension) {
    throw CapacityError("sector dimension " + std::to_string(dim) + " exceeds the dense limit " +
                        std::to_string(kMaxDenseDimension));
  }
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const double diagonal = params.onsite_energy() * basis.n_total();
  for (std::size_t col = 0; col < dim; ++col) {
    const Occupation& s = basis.state(col);
    h(col, col) = diagonal;
    for (const Bond& bond : topology.bonds()) {
      const double kappa = params.coupling(bond.a, bond.b);
      if (kappa == 0.0) continue;
      // a_to^dagger a_from on |s>
      for (auto [to, from] : {std::pair{bond.a, bond.b}, std::pair{bond.b, bond.a}}) {
        const int n_from = s[from - 1];
        if (n_from == 0) continue;
        Occupation t = s;
        t[from - 1] -= 1;
        t[to - 1] += 1;
        const auto row = basis.index(t);
        if (!row) throw SectorError("hopping left the sector");
        h(*row, col) += -kappa * std::sqrt(static_cast<double>(t[to - 1]) * n_from);
      }
    }
  }
  return HermitianOperator(std::move(h));
}

std::vector<EigenPair> ed_spectrum(const HermitianOperator& h, int k_lowest) {
  const Eigen::Index n = h.dimension();
  if (k_lowest < 1 || k_lowest > n) {
    throw ArgumentError("k_lowest=" + std::to_string(k_lowest) + " outside 1.." + std::to_string(n));
  }
  std::vector<EigenPair> out;
  const Eigen::MatrixXcd& m = h.matrix();
  if (n <= 1500 || 4 * k_lowest > n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    for (int i = 0; i < k_lowest; ++i) out.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i)});
    return out;
  }

  const double scale = m.cwiseAbs().rowwise().sum().maxCoeff();
  const MatVec apply = [&m](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y.noalias() = m * x; };
  std::mt19937_64 rng(0x6b61676f6d65ULL);
  std::normal_distribution<double> gauss;
  std::vector<Eigen::VectorXcd> found;
  LanczosOptions options;
  options.tol = 1e-13;
  for (int i = 0; i < k_lowest; ++i) {
    Eigen::VectorXcd start(n);
    for (Eigen::Index j = 0; j < n; ++j) start(j) = cplx(gauss(rng), gauss(rng));
    RitzPair ritz = lowest_eigenpair(apply, n, start, options, found);
    if (ritz.residual > 1e-10 * scale) {
      throw NumericalError("lanczos did not reach the residual bound (" + std::to_string(ritz.residual) + ")");
    }
    found.push_back(ritz.vector);
    out.push_back({ritz.value, ritz.vector});
  }
  std::sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) { return a.value < b.value; });
  return out;
}

std::array<double, kNumSites> local_occupations(const Eigen::VectorXcd& state, const FockBasis& basis) {
  if (static_cast<std::size_t>(state.size()) != basis.dimension()) {
    throw ArgumentError("state dimension does not match the basis");
  }
  const double norm2 = state.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-8) throw StateError("state is not unit-norm (|psi|^2=" + std::to_string(norm2) + ")");
  std::array<double, kNumSites> occ{};
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double p = std::norm(state(i));
    const Occupation& s = basis.state(i);
    for (int k = 0; k < kNumSites; ++k) occ[k] += p * s[k];
  }
  return occ;
}

double single_photon_ground_energy(const HamiltonianParams& params, const KagomeTopology& topology) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(kNumSites, kNumSites);
  for (const Bond& b : topology.bonds()) {
    k(b.a - 1, b.b - 1) = k(b.b - 1, b.a - 1) = params.coupling(b.a, b.b);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k);
  return params.onsite_energy() - solver.eigenvalues().maxCoeff();
}

}  // namespace kagome
