#include "kagome/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "kagome/errors.hpp"
#include "kagome/parallel.hpp"

namespace kagome {

double sector_ground_energy(const HamiltonianParams& params, int n_total, const KagomeTopology& topology) {
  const FockBasis basis = enumerate_basis(n_total, topology);
  return ed_spectrum(build_hamiltonian(params, basis, topology), 1).front().value;
}

DisorderBounds disorder_energy_bounds(const DisorderSpec& spec, int n_total, const HamiltonianParams& base,
                                      const KagomeTopology& topology, int jobs) {
  spec.validate();
  const FockBasis basis = enumerate_basis(n_total, topology);
  auto ground = [&](const HamiltonianParams& p) {
    return ed_spectrum(build_hamiltonian(p, basis, topology), 1).front().value;
  };
  HamiltonianParams p1 = base;
  HamiltonianParams p2 = base;
  for (const Bond& b : topology.bonds()) {
    p1.couplings[b] = spec.kappa1;
    p2.couplings[b] = spec.kappa2;
  }
  DisorderBounds out;
  out.n_total = n_total;
  out.e_kappa1 = ground(p1);
  out.e_kappa2 = ground(p2);
  out.energies.resize(spec.realizations);
  out.seeds.resize(spec.realizations);
  parallel_for(spec.realizations, jobs, [&](int r) {
    out.energies[r] = ground(disordered_params(base, spec, r, topology));
    out.seeds[r] = realization_seed(spec, r);
  });
  const double slack = 1e-12 * std::max({std::abs(out.e_kappa1), std::abs(out.e_kappa2), base.energy_unit()});
  for (int r = 0; r < spec.realizations; ++r) {
    if (out.energies[r] < out.e_kappa2 - slack || out.energies[r] > out.e_kappa1 + slack) {
      out.violations.push_back(r);
    }
  }
  return out;
}

double ScanResult::window_width(int n) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (n_star[p] != n) continue;
    lo = std::min(lo, grid[p]);
    hi = std::max(hi, grid[p]);
  }
  return hi >= lo ? hi - lo : 0.0;
}

ScanResult fixed_n_window_scan(ScanAxis axis, const std::vector<double>& grid, const HamiltonianParams& base,
                               int n_min, int n_max, const KagomeTopology& topology, int jobs) {
  if (grid.empty()) throw ConfigError("scan grid is empty");
  if (n_min < 0 || n_max < n_min) throw ConfigError("scan needs 0 <= n_min <= n_max");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("scan grid must be strictly increasing");
  }
  ScanResult out;
  out.axis = axis;
  out.grid = grid;
  out.n_min = n_min;
  out.n_max = n_max;
  const int n_count = n_max - n_min + 1;
  std::vector<FockBasis> bases;
  for (int n = n_min; n <= n_max; ++n) bases.push_back(enumerate_basis(n, topology));

  auto params_at = [&](double value) {
    HamiltonianParams p = base;
    if (axis == ScanAxis::mu) {
      p.mu = value;
    } else {
      for (const Bond& b : topology.bonds()) p.couplings[b] = value;
    }
    return p;
  };

  out.energies.assign(grid.size(), std::vector<double>(n_count));
  if (axis == ScanAxis::mu) {
    // mu only shifts each sector rigidly.
    std::vector<double> e0(n_count);
    HamiltonianParams p0 = base;
    p0.mu = 0.0;
    parallel_for(n_count, jobs, [&](int i) {
      e0[i] = ed_spectrum(build_hamiltonian(p0, bases[i], topology), 1).front().value;
    });
    for (std::size_t p = 0; p < grid.size(); ++p) {
      for (int i = 0; i < n_count; ++i) out.energies[p][i] = e0[i] - grid[p] * (n_min + i);
    }
  } else {
    const int tasks = static_cast<int>(grid.size()) * n_count;
    parallel_for(tasks, jobs, [&](int t) {
      const int p = t / n_count;
      const int i = t % n_count;
      out.energies[p][i] =
          ed_spectrum(build_hamiltonian(params_at(grid[p]), bases[i], topology), 1).front().value;
    });
  }

  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto& e = out.energies[p];
    double scale = base.energy_unit();
    for (double v : e) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;
    int best = 0;
    bool tied = false;
    for (int i = 1; i < n_count; ++i) {
      if (e[i] < e[best] - tol) {
        best = i;
        tied = false;
      } else if (std::abs(e[i] - e[best]) <= tol) {
        tied = true;
      }
    }
    if (tied) out.ties.push_back(static_cast<int>(p));
    out.n_star.push_back(n_min + best);
  }
  for (std::size_t p = 1; p < grid.size(); ++p) {
    if (out.n_star[p] != out.n_star[p - 1]) {
      out.boundaries.push_back({grid[p - 1], grid[p], out.n_star[p - 1], out.n_star[p]});
    }
  }
  return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("linear fit needs >= 2 matching points");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = x[i];
    a(i, 1) = 1.0;
    b(i) = y[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  LinearFit fit;
  fit.slope = coef(0);
  fit.intercept = coef(1);
  const Eigen::VectorXd r = b - a * coef;
  fit.residuals.assign(r.data(), r.data() + n);
  const double ss_tot = (b.array() - b.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - r.squaredNorm() / ss_tot : 1.0;
  return fit;
}

BenchmarkResult benchmark_peps_vs_ed(const std::vector<int>& n_values, const HamiltonianParams& params,
                                     const KagomeTopology& topology, const BenchmarkOptions& options) {
  BenchmarkResult out;
  std::vector<double> xs;
  std::vector<double> ys;
  const double unit = params.energy_unit();
  for (int n : n_values) {
    if (n < 1 || n > 3) throw CapacityError("PEPS benchmark supports 1 <= N <= 3, got " + std::to_string(n));
    const std::optional<int> cap =
        n >= options.cap_from_n ? std::optional<int>(options.capped_bond_dim) : std::nullopt;
    PepsConfig config = PepsConfig::for_photons(n, topology, cap, options.seed);
    config.max_sweeps = options.max_sweeps;
    config.convergence_tol = options.convergence_tol;

    const auto t0 = std::chrono::steady_clock::now();
    const OptimizationResult result = optimize(config, params, topology);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    BenchmarkRow row;
    row.n_total = n;
    for (const auto& [bond, dim] : config.bond_dims) row.bond_dim = std::max(row.bond_dim, dim);
    row.peps_energy = result.energy;
    row.ed_energy = sector_ground_energy(params, n, topology) / unit;
    row.difference = row.peps_energy - row.ed_energy;
    row.sweeps = static_cast<int>(result.trace.sweeps.size());
    row.converged = result.trace.converged;
    row.wall_seconds = wall;
    out.rows.push_back(row);
    xs.push_back(n);
    ys.push_back(row.ed_energy);
  }
  if (xs.size() >= 2) out.ed_fit = linear_fit(xs, ys);
  return out;
}

}  // namespace kagome
