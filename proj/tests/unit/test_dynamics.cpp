#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "kagome/disorder.hpp"
#include "kagome/dynamics.hpp"
#include "kagome/errors.hpp"

using namespace kagome;

namespace {

struct Cell {
  KagomeTopology topo = build_unit_cell();
  HamiltonianParams p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
};

}  // namespace

TEST(Dynamics, InitialStates) {
  Cell s;
  const auto basis = enumerate_basis(2, s.topo);
  const auto loc = build_initial_state(InitialStateSpec::localized(3, 2), basis);
  EXPECT_NEAR(loc.norm(), 1.0, 1e-15);
  Occupation two_at_3{};
  two_at_3[2] = 2;
  EXPECT_NEAR(std::abs(loc(*basis.index(two_at_3))), 1.0, 1e-15);
  const auto sup = build_initial_state(InitialStateSpec::superposition(M_PI / 2), basis);
  EXPECT_NEAR(sup.norm(), 1.0, 1e-14);
  Occupation split{};
  split[0] = 1;
  split[6] = 1;
  EXPECT_NEAR(std::arg(sup(*basis.index(split))), M_PI / 2, 1e-14);
  EXPECT_THROW(build_initial_state(InitialStateSpec::localized(1, 3), basis), SectorError);
}

TEST(Dynamics, SinglePhotonMatchesMatrixExponential) {
  Cell s;
  const auto basis = enumerate_basis(1, s.topo);
  const auto h = build_hamiltonian(s.p, basis, s.topo);
  const Eigen::MatrixXcd hr = h.matrix() / s.p.energy_unit();
  const auto psi0 = build_initial_state(InitialStateSpec::localized(1, 1), basis);
  const SpectralPropagator prop(h, s.p.energy_unit());
  for (double tau : {0.0, 0.37, 2.5, 11.0}) {
    const Eigen::MatrixXcd u = (cplx(0.0, -tau) * hr).exp();
    EXPECT_LT((prop.evolve(psi0, tau) - u * psi0).norm(), 1e-12) << tau;
  }
}

TEST(Dynamics, ConservationAlongTheGrid) {
  Cell s;
  const auto basis = enumerate_basis(2, s.topo);
  const auto h = build_hamiltonian(s.p, basis, s.topo);
  const auto psi0 = build_initial_state(InitialStateSpec::superposition(0.4), basis);
  const TimeGrid grid{0.0, 15.0, 61};
  const auto states = spectral_evolve(h, psi0, grid, s.p.energy_unit());
  ASSERT_EQ(states.size(), 61u);
  EXPECT_EQ((states[0] - psi0).norm(), 0.0);
  const double e0 = psi0.dot(h.matrix() * psi0).real() / s.p.energy_unit();
  const auto occ = occupation_series(states, basis);
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_NEAR(states[i].norm(), 1.0, 1e-12);
    EXPECT_NEAR(states[i].dot(h.matrix() * states[i]).real() / s.p.energy_unit(), e0, 1e-10);
    EXPECT_NEAR(occ.row(i).sum(), 2.0, 1e-12);
  }
}

TEST(Dynamics, CorrelationMetrics) {
  Cell s;
  const auto basis = enumerate_basis(2, s.topo);
  const auto h = build_hamiltonian(s.p, basis, s.topo);
  const auto psi0 = build_initial_state(InitialStateSpec::localized(1, 2), basis);
  const TimeGrid grid{0.0, 10.0, 201};
  const auto states = spectral_evolve(h, psi0, grid, s.p.energy_unit());
  const auto g17 = correlation(1, 7, states, grid, basis);
  EXPECT_EQ(g17.values.front(), 0.0);
  EXPECT_GT(peak_value(g17), 0.0);
  EXPECT_NEAR(contrast(g17), peak_value(g17), 1e-15);
  const double tp = first_peak_time(g17);
  EXPECT_GT(tp, 0.0);
  EXPECT_LT(tp, 10.0);
  // G_{k,k} = <n_k^2>.
  const auto g11 = correlation(1, 1, states, grid, basis);
  EXPECT_NEAR(g11.values.front(), 4.0, 1e-12);
}

TEST(Dynamics, TimeGridValidation) {
  EXPECT_THROW((TimeGrid{1.0, 0.0, 5}.validate()), Error);
  EXPECT_THROW((TimeGrid{0.0, 1.0, 0}.validate()), Error);
  const TimeGrid g{0.0, 1.0, 5};
  EXPECT_DOUBLE_EQ(g.at(4), 1.0);
  EXPECT_DOUBLE_EQ(g.at(2), 0.5);
}

TEST(Dynamics, EnsembleIsDeterministicAndThreadIndependent) {
  Cell s;
  DisorderSpec spec;
  spec.kappa1 = 0.5 * s.p.energy_unit();
  spec.kappa2 = 1.5 * s.p.energy_unit();
  spec.master_seed = 99;
  spec.realizations = 6;
  const TimeGrid grid{0.0, 5.0, 21};
  const auto init = InitialStateSpec::localized(1, 2);
  const auto a = disorder_correlation(init, 1, 7, spec, s.p, grid, s.topo, 1);
  const auto b = disorder_correlation(init, 1, 7, spec, s.p, grid, s.topo, 3);
  ASSERT_EQ(a.realizations.size(), 6u);
  EXPECT_EQ(a.seeds, b.seeds);
  EXPECT_EQ(a.mean.values, b.mean.values);
  for (std::size_t i = 0; i < grid.times().size(); ++i) {
    double sum = 0.0;
    for (const auto& r : a.realizations) sum += r.values[i];
    EXPECT_NEAR(a.mean.values[i], sum / 6.0, 1e-14);
  }
}
