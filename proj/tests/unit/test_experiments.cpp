#include <gtest/gtest.h>

#include "kagome/disorder.hpp"
#include "kagome/errors.hpp"
#include "kagome/experiments.hpp"

using namespace kagome;

TEST(Experiments, LinearFitRecoversALine) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(-1.25 * v + 0.5);
  const auto fit = linear_fit(x, y);
  EXPECT_NEAR(fit.slope, -1.25, 1e-13);
  EXPECT_NEAR(fit.intercept, 0.5, 1e-13);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-13);
  for (double r : fit.residuals) EXPECT_NEAR(r, 0.0, 1e-13);
  const auto noisy = linear_fit({0, 1, 2, 3}, {0, 1.1, 1.9, 3.2});
  EXPECT_LT(noisy.r_squared, 1.0);
  EXPECT_GT(noisy.r_squared, 0.98);
  EXPECT_THROW(linear_fit({1}, {1}), Error);
}

TEST(Experiments, SectorEnergyIsLinearInN) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  const double e1 = sector_ground_energy(p, 1, topo);
  EXPECT_NEAR(e1 / p.energy_unit(), 2.0 - (1.0 + std::sqrt(5.0)), 1e-12);
  EXPECT_NEAR(sector_ground_energy(p, 3, topo) / (3 * e1), 1.0, 1e-10);
  EXPECT_EQ(sector_ground_energy(p, 0, topo), 0.0);
}

TEST(Experiments, DisorderBoundsHold) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  DisorderSpec spec{0.5 * p.energy_unit(), 1.5 * p.energy_unit(), 3, 30};
  const auto b = disorder_energy_bounds(spec, 1, p, topo, 2);
  EXPECT_EQ(b.energies.size(), 30u);
  EXPECT_TRUE(b.violations.empty());
  EXPECT_LT(b.e_kappa2, b.e_kappa1);
  for (double e : b.energies) {
    EXPECT_GE(e, b.e_kappa2);
    EXPECT_LE(e, b.e_kappa1);
  }
}

TEST(Experiments, MuScanSelectsEmptyThenFullSector) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  const double unit = p.energy_unit();
  const double e1 = (2.0 - (1.0 + std::sqrt(5.0)));
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back((-3.0 + 0.25 * i) * unit);
  const auto scan = fixed_n_window_scan(ScanAxis::mu, grid, p, 0, 3, topo);
  ASSERT_EQ(scan.n_star.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    // Non-interacting: every sector shifts by N (e1 - mu), so only the ends win.
    const double slope = e1 - grid[i] / unit;
    if (slope > 1e-9) {
      EXPECT_EQ(scan.n_star[i], 0);
    } else if (slope < -1e-9) {
      EXPECT_EQ(scan.n_star[i], 3);
    }
    for (int n = 0; n <= 3; ++n) EXPECT_NEAR(scan.energies[i][n] / unit, n * slope, 1e-9);
  }
  ASSERT_EQ(scan.boundaries.size(), 1u);
  EXPECT_EQ(scan.boundaries[0].from, 0);
  EXPECT_EQ(scan.boundaries[0].to, 3);
  EXPECT_EQ(scan.window_width(1), 0.0);
  EXPECT_GT(scan.window_width(3), 0.0);
}

TEST(Experiments, KappaScanLowersTheEnergy) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i) grid.push_back((0.2 + 0.2 * i) * p.energy_unit());
  const auto scan = fixed_n_window_scan(ScanAxis::kappa, grid, p, 2, 2, topo);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_LT(scan.energies[i][0], scan.energies[i - 1][0]);
}

TEST(Experiments, BenchmarkRejectsLargeN) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  EXPECT_THROW(benchmark_peps_vs_ed({4}, p, topo), CapacityError);
}

TEST(Experiments, BenchmarkSinglePhoton) {
  const auto topo = build_unit_cell();
  const auto p = HamiltonianParams::uniform_reduced(topo, 2.0, 1.0);
  BenchmarkOptions opt;
  opt.max_sweeps = 20;
  const auto r = benchmark_peps_vs_ed({1}, p, topo, opt);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].bond_dim, 4);
  EXPECT_NEAR(r.rows[0].ed_energy, 2.0 - (1.0 + std::sqrt(5.0)), 1e-12);
  EXPECT_NEAR(r.rows[0].difference, r.rows[0].peps_energy - r.rows[0].ed_energy, 1e-15);
  EXPECT_LT(std::abs(r.rows[0].difference), 1e-5);
}
