#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "kagome/errors.hpp"
#include "kagome/fock.hpp"

using namespace kagome;

namespace {

HamiltonianParams reduced(double kappa, double mu = 0.0) {
  return HamiltonianParams::uniform_reduced(build_unit_cell(), 2.0, kappa, mu);
}

}  // namespace

TEST(Fock, SectorDimensionsAreBinomial) {
  const auto topo = build_unit_cell();
  for (int n = 0; n <= 5; ++n) {
    const auto basis = enumerate_basis(n, topo);
    EXPECT_EQ(basis.dimension(), static_cast<std::size_t>(oracle::binomial(n + 11, n)));
    EXPECT_EQ(basis.dimension(), sector_dimension(n));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      EXPECT_EQ(total_photons(basis.state(i)), n);
      EXPECT_EQ(basis.index(basis.state(i)), i);
      if (i > 0) {
        EXPECT_LT(basis.state(i - 1), basis.state(i));
      }
    }
  }
  EXPECT_THROW(enumerate_basis(kMaxPhotons + 1, topo), CapacityError);
}

TEST(Fock, MatrixElementsMatchLadderArithmetic) {
  const auto topo = build_unit_cell();
  auto p = reduced(1.0, 0.3);
  p.couplings[make_bond(2, 4)] *= 1.7;
  const auto basis = enumerate_basis(3, topo);
  const auto h = build_hamiltonian(p, basis, topo);
  EXPECT_EQ(h.hermiticity_defect(), 0.0);
  const double unit = p.energy_unit();
  for (std::size_t j = 0; j < basis.dimension(); ++j) {
    std::vector<int> occ(basis.state(j).begin(), basis.state(j).end());
    Eigen::VectorXd col = Eigen::VectorXd::Zero(basis.dimension());
    col(j) += 3 * (2.0 - 0.3);
    for (const auto& b : topo.bonds()) {
      for (auto [to, from] : {std::pair{b.a, b.b}, std::pair{b.b, b.a}}) {
        auto out = occ;
        const double amp = oracle::hop(out, to, from, 99);
        if (amp == 0.0) continue;
        Occupation o{};
        for (int k = 0; k < 12; ++k) o[k] = static_cast<std::uint8_t>(out[k]);
        col(*basis.index(o)) -= p.coupling(b.a, b.b) / unit * amp;
      }
    }
    EXPECT_LT((h.matrix().col(j).real() / unit - col).norm(), 1e-12);
    EXPECT_EQ(h.matrix().col(j).imag().norm(), 0.0);
  }
}

TEST(Fock, SinglePhotonGroundMatchesAdjacency) {
  const auto topo = build_unit_cell();
  const auto p = reduced(0.8);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(topo.adjacency());
  const double expected = 2.0 - 0.8 * es.eigenvalues().maxCoeff();
  const auto basis = enumerate_basis(1, topo);
  const double e = ed_spectrum(build_hamiltonian(p, basis, topo), 1)[0].value / p.energy_unit();
  EXPECT_NEAR(e, expected, 1e-12);
  EXPECT_NEAR(single_photon_ground_energy(p, topo) / p.energy_unit(), expected, 1e-12);
}

TEST(Fock, NonInteractingSectorsAreAdditive) {
  const auto topo = build_unit_cell();
  const auto p = reduced(1.0);
  const double e1 = single_photon_ground_energy(p, topo);
  for (int n = 2; n <= 4; ++n) {
    const auto basis = enumerate_basis(n, topo);
    const double e = ed_spectrum(build_hamiltonian(p, basis, topo), 1)[0].value;
    EXPECT_NEAR(e / (n * e1), 1.0, 1e-10);
  }
}

TEST(Fock, LargeSectorUsesIterativeSolver) {
  const auto topo = build_unit_cell();
  const auto p = reduced(1.0);
  const auto basis = enumerate_basis(5, topo);
  const auto spectrum = ed_spectrum(build_hamiltonian(p, basis, topo), 2);
  EXPECT_NEAR(spectrum[0].value / (5 * single_photon_ground_energy(p, topo)), 1.0, 1e-10);
  EXPECT_LE(spectrum[0].value, spectrum[1].value);
}

TEST(Fock, GroundOccupationsRespectSymmetry) {
  const auto topo = build_unit_cell();
  const auto p = reduced(1.0);
  const auto basis = enumerate_basis(2, topo);
  const auto gs = ed_spectrum(build_hamiltonian(p, basis, topo), 1)[0].vector;
  const auto occ = local_occupations(gs, basis);
  double total = 0.0;
  for (int k = 1; k <= 12; ++k) {
    total += occ[k - 1];
    EXPECT_NEAR(occ[k - 1], occ[topo.rotate(k) - 1], 1e-10);
  }
  EXPECT_NEAR(total, 2.0, 1e-12);
  EXPECT_GT(occ[1], occ[0]);
}

TEST(Fock, RejectsInvalidParameters) {
  const auto topo = build_unit_cell();
  auto p = reduced(1.0);
  p.couplings.erase(make_bond(1, 2));
  EXPECT_THROW(p.validate(topo), ConfigError);
  auto q = reduced(1.0);
  q.omega_d = -1.0;
  EXPECT_THROW(q.validate(topo), ConfigError);
  const auto basis = enumerate_basis(1, topo);
  EXPECT_THROW(local_occupations(Eigen::VectorXcd::Ones(12), basis), StateError);
}
