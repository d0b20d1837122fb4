#include "kagome/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kagome/errors.hpp"
#include "kagome/parallel.hpp"

namespace kagome {

namespace {

Occupation single(int site, int photons) {
  Occupation occ{};
  occ[site - 1] = static_cast<std::uint8_t>(photons);
  return occ;
}

void check_site_arg(int k) {
  if (!valid_site(k)) throw ArgumentError("site " + std::to_string(k) + " outside 1..12");
}

std::string format_occupation(const Occupation& occ) {
  std::string s;
  for (int k = 0; k < kNumSites; ++k) {
    if (k) s += ' ';
    s += std::to_string(occ[k]);
  }
  return s;
}

}  // namespace

InitialStateSpec InitialStateSpec::localized(int site, int photons) {
  InitialStateSpec s;
  s.kind = InitialKind::localized;
  s.site = site;
  s.photons = photons;
  return s;
}

InitialStateSpec InitialStateSpec::superposition(double phase, int site_a, int site_b) {
  InitialStateSpec s;
  s.kind = InitialKind::superposition;
  s.phase = phase;
  s.site_a = site_a;
  s.site_b = site_b;
  s.photons = 2;
  return s;
}

InitialStateSpec InitialStateSpec::custom(std::vector<std::pair<Occupation, cplx>> amplitudes) {
  InitialStateSpec s;
  s.kind = InitialKind::custom;
  s.amplitudes = std::move(amplitudes);
  s.photons = s.amplitudes.empty() ? 0 : total_photons(s.amplitudes.front().first);
  return s;
}

int InitialStateSpec::photon_number() const {
  switch (kind) {
    case InitialKind::localized: return photons;
    case InitialKind::superposition: return 2;
    case InitialKind::custom: return amplitudes.empty() ? 0 : total_photons(amplitudes.front().first);
  }
  return 0;
}

std::string InitialStateSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case InitialKind::localized: os << "localized site=" << site << " photons=" << photons; break;
    case InitialKind::superposition:
      os << "superposition sites=" << site_a << "," << site_b << " phase=" << phase;
      break;
    case InitialKind::custom: os << "custom terms=" << amplitudes.size(); break;
  }
  return os.str();
}

Eigen::VectorXcd build_initial_state(const InitialStateSpec& spec, const FockBasis& basis) {
  std::vector<std::pair<Occupation, cplx>> terms;
  switch (spec.kind) {
    case InitialKind::localized:
      check_site_arg(spec.site);
      if (spec.photons < 0) throw ArgumentError("photon count must be >= 0");
      terms.push_back({single(spec.site, spec.photons), 1.0});
      break;
    case InitialKind::superposition: {
      check_site_arg(spec.site_a);
      check_site_arg(spec.site_b);
      if (spec.site_a == spec.site_b) throw ArgumentError("superposition needs two distinct sites");
      const double c = 1.0 / std::sqrt(3.0);
      Occupation split{};
      split[spec.site_a - 1] = 1;
      split[spec.site_b - 1] = 1;
      terms.push_back({single(spec.site_a, 2), c});
      terms.push_back({single(spec.site_b, 2), c});
      terms.push_back({split, c * std::polar(1.0, spec.phase)});
      break;
    }
    case InitialKind::custom:
      if (spec.amplitudes.empty()) throw ArgumentError("custom initial state has no amplitudes");
      terms = spec.amplitudes;
      break;
  }

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
  for (const auto& [occ, amp] : terms) {
    const auto idx = basis.index(occ);
    if (!idx) {
      throw SectorError("occupation (" + format_occupation(occ) + ") is not in the N=" +
                        std::to_string(basis.n_total()) + " sector");
    }
    psi(static_cast<Eigen::Index>(*idx)) += amp;
  }
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw StateError("initial state has zero norm");
  return psi / norm;
}

void TimeGrid::validate() const {
  if (n_samples < 2) throw ConfigError("time grid needs at least 2 samples");
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || !(t_end > t_start)) {
    throw ConfigError("time grid must be strictly increasing");
  }
}

double TimeGrid::at(int i) const {
  if (i == n_samples - 1) return t_end;
  return t_start + (t_end - t_start) * static_cast<double>(i) / (n_samples - 1);
}

std::vector<double> TimeGrid::times() const {
  validate();
  std::vector<double> out(n_samples);
  for (int i = 0; i < n_samples; ++i) out[i] = at(i);
  return out;
}

SpectralPropagator::SpectralPropagator(const HermitianOperator& h, double energy_unit) {
  if (!(energy_unit > 0.0)) throw ArgumentError("energy unit must be > 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.matrix() / energy_unit);
  if (solver.info() != Eigen::Success) throw NumericalError("sector eigendecomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
}

Eigen::VectorXcd SpectralPropagator::evolve(const Eigen::VectorXcd& psi0, double tau) const {
  if (psi0.size() != values_.size()) throw ArgumentError("state dimension does not match the Hamiltonian");
  Eigen::VectorXcd c = vectors_.adjoint() * psi0;
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::polar(1.0, -values_(j) * tau);
  return vectors_ * c;
}

std::vector<Eigen::VectorXcd> SpectralPropagator::evolve(const Eigen::VectorXcd& psi0, const TimeGrid& grid) const {
  grid.validate();
  if (psi0.size() != values_.size()) throw ArgumentError("state dimension does not match the Hamiltonian");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10) throw StateError("initial state is not unit-norm");
  const Eigen::VectorXcd c0 = vectors_.adjoint() * psi0;
  std::vector<Eigen::VectorXcd> out;
  out.reserve(grid.n_samples);
  Eigen::VectorXcd c(c0.size());
  for (int i = 0; i < grid.n_samples; ++i) {
    const double tau = grid.at(i);
    if (tau == 0.0) {
      out.push_back(psi0);
      continue;
    }
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = c0(j) * std::polar(1.0, -values_(j) * tau);
    out.push_back(vectors_ * c);
  }
  return out;
}

std::vector<Eigen::VectorXcd> spectral_evolve(const HermitianOperator& h, const Eigen::VectorXcd& psi0,
                                              const TimeGrid& grid, double energy_unit) {
  if (psi0.size() != h.dimension()) throw ArgumentError("state dimension does not match the Hamiltonian");
  return SpectralPropagator(h, energy_unit).evolve(psi0, grid);
}

CorrelationSeries correlation(int k, int k_prime, const std::vector<Eigen::VectorXcd>& states,
                              const TimeGrid& grid, const FockBasis& basis) {
  check_site_arg(k);
  check_site_arg(k_prime);
  if (static_cast<int>(states.size()) != grid.n_samples) throw ArgumentError("one state per grid sample required");
  const std::size_t dim = basis.dimension();
  std::vector<double> weight(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const Occupation& s = basis.state(i);
    weight[i] = static_cast<double>(s[k - 1]) * s[k_prime - 1];
  }
  CorrelationSeries out;
  out.k = k;
  out.k_prime = k_prime;
  out.times = grid.times();
  out.values.reserve(states.size());
  for (const auto& psi : states) {
    if (static_cast<std::size_t>(psi.size()) != dim) throw ArgumentError("state dimension does not match the basis");
    double g = 0.0;
    for (std::size_t i = 0; i < dim; ++i) g += std::norm(psi(static_cast<Eigen::Index>(i))) * weight[i];
    out.values.push_back(g);
  }
  return out;
}

Eigen::MatrixXd occupation_series(const std::vector<Eigen::VectorXcd>& states, const FockBasis& basis) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(states.size()), kNumSites);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const auto occ = local_occupations(states[t] / states[t].norm(), basis);
    for (int k = 0; k < kNumSites; ++k) out(static_cast<Eigen::Index>(t), k) = occ[k];
  }
  return out;
}

double contrast(const CorrelationSeries& series) {
  if (series.values.empty()) throw ArgumentError("empty series");
  const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.end());
  return *hi - *lo;
}

double peak_value(const CorrelationSeries& series) {
  if (series.values.empty()) throw ArgumentError("empty series");
  return *std::max_element(series.values.begin(), series.values.end());
}

double first_peak_time(const CorrelationSeries& series) {
  const auto& v = series.values;
  if (v.size() < 3) throw ArgumentError("series too short for a peak");
  const double threshold = 0.5 * peak_value(series);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] >= threshold && v[i] >= v[i - 1] && v[i] > v[i + 1]) return series.times[i];
  }
  const auto it = std::max_element(v.begin(), v.end());
  return series.times[static_cast<std::size_t>(it - v.begin())];
}

DisorderCorrelation disorder_correlation(const InitialStateSpec& initial, int k, int k_prime,
                                         const DisorderSpec& disorder, const HamiltonianParams& base,
                                         const TimeGrid& grid, const KagomeTopology& topology, int jobs) {
  disorder.validate();
  grid.validate();
  const FockBasis basis = enumerate_basis(initial.photon_number(), topology);
  const Eigen::VectorXcd psi0 = build_initial_state(initial, basis);

  DisorderCorrelation out;
  out.realizations.resize(disorder.realizations);
  out.seeds.resize(disorder.realizations);
  parallel_for(disorder.realizations, jobs, [&](int r) {
    const HamiltonianParams p = disordered_params(base, disorder, r, topology);
    const HermitianOperator h = build_hamiltonian(p, basis, topology);
    const auto states = SpectralPropagator(h, p.energy_unit()).evolve(psi0, grid);
    CorrelationSeries series = correlation(k, k_prime, states, grid, basis);
    series.metadata.push_back({"realization", std::to_string(r)});
    series.metadata.push_back({"seed", std::to_string(realization_seed(disorder, r))});
    series.metadata.push_back({"initial", initial.describe()});
    out.realizations[r] = std::move(series);
    out.seeds[r] = realization_seed(disorder, r);
  });

  out.mean.k = k;
  out.mean.k_prime = k_prime;
  out.mean.times = grid.times();
  out.mean.values.assign(grid.n_samples, 0.0);
  for (const auto& s : out.realizations) {
    for (int i = 0; i < grid.n_samples; ++i) out.mean.values[i] += s.values[i];
  }
  for (double& v : out.mean.values) v /= disorder.realizations;
  out.mean.metadata.push_back({"realizations", std::to_string(disorder.realizations)});
  out.mean.metadata.push_back({"master_seed", std::to_string(disorder.master_seed)});
  out.mean.metadata.push_back({"initial", initial.describe()});
  return out;
}

}  // namespace kagome
