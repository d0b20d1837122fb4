#include "kagome/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "kagome/dynamics.hpp"
#include "kagome/experiments.hpp"
#include "kagome/io.hpp"
#include "kagome/peps.hpp"

namespace kagome {

namespace {

using nlohmann::json;

std::vector<ManifestField> common_fields() {
  return {
      {"units", "string", "reduced",
       "reduced: omega_d in units of Omega_R, kappa/mu in hbar*Omega_R; si: omega_d in rad/s, kappa/mu in J"},
      {"omega_r", "number", kDefaultOmegaR, "reference frequency Omega_R (rad/s)"},
      {"omega_d", "number", 2.0, "cavity driving frequency"},
      {"kappa", "number", 1.0, "uniform hopping strength on every bond"},
      {"couplings", "array", json::array(), "per-bond overrides [[k, k', kappa], ...]"},
      {"mu", "number", 0.0, "chemical potential"},
      {"seed", "integer", 1, "master seed"},
      {"svg", "bool", false, "also write static SVG plots"},
      {"description", "string", "", "free-form note, copied into summary.json"},
      {"output", "string", "", "output directory (empty: $KAGOME_OUT/<kind> or out/<kind>)"},
  };
}

std::vector<ManifestField> kind_fields(const std::string& kind) {
  const json localized = {{"kind", "localized"}, {"site", 1}, {"photons", 2}};
  if (kind == "ed-spectrum") {
    return {{"n", "integer", nullptr, "photon number N"},
            {"levels", "integer", 0, "number of lowest levels to report (0: all)"}};
  }
  if (kind == "peps-optimize") {
    return {{"n", "integer", nullptr, "photon number N (1..3)"},
            {"bond_cap", "integer", 0, "cap D on the bond dimension (0: d^2)"},
            {"max_sweeps", "integer", 200, "sweep budget"},
            {"convergence_tol", "number", 1e-8, "|Delta E| per full sweep, hbar*Omega_R"},
            {"regularization_eps", "number", 1e-10, "pseudo-inverse cutoff relative to lambda_max(N_eff)"},
            {"number_penalty", "number", -1.0, "weight of (N - n)^2 in hbar*Omega_R (negative: automatic)"},
            {"compare_ed", "bool", true, "also report the exact sector energy"}};
  }
  if (kind == "benchmark") {
    return {{"n_values", "array", json::array({1, 2, 3}), "photon numbers to benchmark"},
            {"capped_bond_dim", "integer", 6, "bond cap applied from cap_from_n on"},
            {"cap_from_n", "integer", 3, "smallest N that runs capped"},
            {"max_sweeps", "integer", 200, "sweep budget per N"},
            {"convergence_tol", "number", 1e-8, "|Delta E| per full sweep, hbar*Omega_R"},
            {"fit_n_max", "integer", 5, "ED energies for the linear fit run over N = 1..fit_n_max"}};
  }
  if (kind == "dynamics") {
    return {{"initial", "object", localized,
             "{kind: localized, site, photons} | {kind: superposition, phase, sites: [a, b]} | "
             "{kind: custom, amplitudes: [[occupations[12], re, im], ...]}"},
            {"t_start", "number", 0.0, "first sample, units of 1/Omega_R"},
            {"t_end", "number", 20.0, "last sample, units of 1/Omega_R"},
            {"samples", "integer", 401, "number of time samples"},
            {"pairs", "array", json::array({json::array({1, 7})}), "site pairs (k, k') for G_{k,k'}(t)"}};
  }
  if (kind == "disorder-dynamics") {
    return {{"initial", "object", localized, "initial state, as for dynamics"},
            {"t_start", "number", 0.0, "first sample, units of 1/Omega_R"},
            {"t_end", "number", 20.0, "last sample, units of 1/Omega_R"},
            {"samples", "integer", 401, "number of time samples"},
            {"pair", "array", json::array({1, 7}), "site pair (k, k')"},
            {"kappa1", "number", nullptr, "lower end of the disorder interval"},
            {"kappa2", "number", nullptr, "upper end of the disorder interval"},
            {"realizations", "integer", 20, "number of coupling realizations"},
            {"bounds_n", "integer", 0, "if > 0, also check ground energies of this sector against the interval ends"}};
  }
  if (kind == "mu-scan") {
    return {{"axis", "string", "mu", "scanned quantity: mu or kappa"},
            {"start", "number", nullptr, "first grid value"},
            {"stop", "number", nullptr, "last grid value"},
            {"points", "integer", 41, "number of grid points"},
            {"n_min", "integer", 0, "smallest sector"},
            {"n_max", "integer", 5, "largest sector"}};
  }
  if (kind == "topology-export") return {};
  throw ParseError("unknown experiment kind '" + kind + "'");
}

bool type_matches(const json& v, const std::string& type) {
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer();
  if (type == "string") return v.is_string();
  if (type == "bool") return v.is_boolean();
  if (type == "array") return v.is_array();
  if (type == "object") return v.is_object();
  return false;
}

int site_of(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ValidationError(what + " must be an integer site");
  const int k = v.get<int>();
  if (!valid_site(k)) throw ValidationError(what + " = " + std::to_string(k) + " is outside 1..12");
  return k;
}

std::pair<int, int> pair_of(const json& v) {
  if (!v.is_array() || v.size() != 2) throw ValidationError("site pair must be [k, k']");
  return {site_of(v[0], "pair site"), site_of(v[1], "pair site")};
}

InitialStateSpec initial_of(const json& j) {
  const std::string kind = j.value("kind", "localized");
  if (kind == "localized") return InitialStateSpec::localized(site_of(j.value("site", json(1)), "initial.site"), j.value("photons", 2));
  if (kind == "superposition") {
    const json sites = j.value("sites", json::array({1, 7}));
    const auto [a, b] = pair_of(sites);
    if (!j.value("phase", json(0.0)).is_number()) throw ValidationError("initial.phase must be a number");
    return InitialStateSpec::superposition(j.value("phase", 0.0), a, b);
  }
  if (kind == "custom") {
    std::vector<std::pair<Occupation, cplx>> amps;
    for (const auto& row : j.at("amplitudes")) {
      if (!row.is_array() || row.size() != 3 || !row[0].is_array() || row[0].size() != kNumSites) {
        throw ValidationError("custom amplitude rows are [[12 occupations], re, im]");
      }
      Occupation occ{};
      for (int k = 0; k < kNumSites; ++k) occ[k] = static_cast<std::uint8_t>(row[0][k].get<int>());
      amps.push_back({occ, cplx(row[1].get<double>(), row[2].get<double>())});
    }
    return InitialStateSpec::custom(std::move(amps));
  }
  throw ValidationError("initial.kind must be localized, superposition or custom");
}

std::string csv_name_for_pair(int k, int kp) { return "correlation_" + std::to_string(k) + "_" + std::to_string(kp) + ".csv"; }

class Writer {
 public:
  Writer(std::filesystem::path dir, const Manifest& m) : dir_(std::move(dir)), manifest_(m) {}

  void csv(const std::string& name, CsvTable table) {
    table.metadata.insert(table.metadata.begin(), {"config_hash", manifest_.hash()});
    table.metadata.insert(table.metadata.begin(), {"kind", manifest_.kind});
    text(name, table.render());
  }
  void text(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    artifacts.push_back(dir_ / name);
  }
  std::vector<std::filesystem::path> artifacts;

 private:
  std::filesystem::path dir_;
  const Manifest& manifest_;
};

double reduced_unit(const Manifest& m) {
  return m.config.at("units") == "si" ? 1.0 : kHbar * m.config.at("omega_r").get<double>();
}

TimeGrid grid_of(const json& c) {
  TimeGrid g{c.at("t_start").get<double>(), c.at("t_end").get<double>(), c.at("samples").get<int>()};
  g.validate();
  return g;
}

void run_ed_spectrum(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s) {
  const int n = m.config.at("n");
  const FockBasis basis = enumerate_basis(n, topo);
  const HermitianOperator h = build_hamiltonian(p, basis, topo);
  int levels = m.config.at("levels");
  if (levels <= 0 || levels > static_cast<int>(basis.dimension())) levels = static_cast<int>(basis.dimension());
  const auto spectrum = ed_spectrum(h, levels);
  CsvTable t;
  t.metadata = {{"n", std::to_string(n)}, {"dimension", std::to_string(basis.dimension())}};
  t.header = {"index", "energy_J", "energy_over_hbar_OmegaR"};
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    t.add_row({std::to_string(i), format_double(spectrum[i].value), format_double(spectrum[i].value / p.energy_unit())});
  }
  w.csv("spectrum.csv", t);
  const auto occ = local_occupations(spectrum.front().vector / spectrum.front().vector.norm(), basis);
  CsvTable o;
  o.header = {"site", "role", "n"};
  for (int k = 1; k <= kNumSites; ++k) {
    o.add_row({std::to_string(k), topo.role(k) == SiteRole::inner ? "inner" : "outer", format_double(occ[k - 1])});
  }
  w.csv("occupations.csv", o);
  s["dimension"] = basis.dimension();
  s["ground_energy_over_hbar_OmegaR"] = spectrum.front().value / p.energy_unit();
}

void run_peps(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s) {
  const json& c = m.config;
  const int n = c.at("n");
  if (n < 1 || n > 3) throw CapacityError("peps-optimize supports 1 <= n <= 3");
  const int cap = c.at("bond_cap");
  PepsConfig config = PepsConfig::for_photons(n, topo, cap > 0 ? std::optional<int>(cap) : std::nullopt,
                                              c.at("seed").get<std::uint64_t>());
  config.max_sweeps = c.at("max_sweeps");
  config.convergence_tol = c.at("convergence_tol");
  config.regularization_eps = c.at("regularization_eps");
  if (c.at("number_penalty").get<double>() >= 0.0) config.number_penalty = c.at("number_penalty").get<double>();
  config.validate(topo);
  const OptimizationResult result = optimize(config, p, topo);
  CsvTable trace = trace_table(result.trace);
  trace.metadata.push_back({"converged", result.trace.converged ? "true" : "false"});
  w.csv("trace.csv", trace);
  const auto occ = peps_local_occupations(result.state);
  CsvTable o;
  o.header = {"site", "role", "n"};
  for (int k = 1; k <= kNumSites; ++k) {
    o.add_row({std::to_string(k), topo.role(k) == SiteRole::inner ? "inner" : "outer", format_double(occ[k - 1])});
  }
  w.csv("occupations.csv", o);
  w.text("checkpoint.json", checkpoint_json(result.state).dump(1) + "\n");
  if (c.at("svg").get<bool>()) {
    PlotSeries series{"PEPS", {}, {}};
    for (const auto& r : result.trace.rows) {
      series.x.push_back(r.sweep);
      series.y.push_back(r.energy);
    }
    w.text("trace.svg", line_plot_svg("ground-state energy per sweep", "sweep", "E / (hbar Omega_R)", {series}));
  }
  s["energy_over_hbar_OmegaR"] = result.energy;
  s["sweeps"] = result.trace.sweeps.size();
  s["converged"] = result.trace.converged;
  s["number_penalty"] = number_penalty_weight(config, p);
  if (c.at("compare_ed").get<bool>()) {
    s["ed_energy_over_hbar_OmegaR"] = sector_ground_energy(p, n, topo) / p.energy_unit();
  }
}

void run_benchmark(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s) {
  const json& c = m.config;
  BenchmarkOptions opt;
  opt.capped_bond_dim = c.at("capped_bond_dim");
  opt.cap_from_n = c.at("cap_from_n");
  opt.seed = c.at("seed");
  opt.max_sweeps = c.at("max_sweeps");
  opt.convergence_tol = c.at("convergence_tol");
  std::vector<int> ns;
  for (const auto& v : c.at("n_values")) ns.push_back(v.get<int>());
  const BenchmarkResult result = benchmark_peps_vs_ed(ns, p, topo, opt);
  CsvTable t;
  t.header = {"n", "bond_dim", "peps_energy", "ed_energy", "difference", "sweeps", "converged"};
  // Wall time goes to the summary only; CSV bodies stay reproducible.
  json timings = json::array();
  for (const auto& r : result.rows) {
    t.add_row({std::to_string(r.n_total), std::to_string(r.bond_dim), format_double(r.peps_energy),
               format_double(r.ed_energy), format_double(r.difference), std::to_string(r.sweeps),
               r.converged ? "1" : "0"});
    timings.push_back({{"n", r.n_total}, {"wall_seconds", r.wall_seconds}});
  }
  w.csv("benchmark.csv", t);

  const int fit_max = c.at("fit_n_max");
  std::vector<double> xs;
  std::vector<double> ys;
  for (int n = 1; n <= fit_max; ++n) {
    xs.push_back(n);
    ys.push_back(sector_ground_energy(p, n, topo) / p.energy_unit());
  }
  if (xs.size() >= 2) {
    const LinearFit fit = linear_fit(xs, ys);
    CsvTable f;
    f.metadata = {{"slope", format_double(fit.slope)}, {"intercept", format_double(fit.intercept)},
                  {"r_squared", format_double(fit.r_squared)}};
    f.header = {"n", "ed_energy", "residual"};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      f.add_row({format_double(xs[i]), format_double(ys[i]), format_double(fit.residuals[i])});
    }
    w.csv("ed_fit.csv", f);
    s["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
  }
  s["timings"] = timings;
}

void run_dynamics(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s) {
  const json& c = m.config;
  const InitialStateSpec init = initial_of(c.at("initial"));
  const TimeGrid grid = grid_of(c);
  const FockBasis basis = enumerate_basis(init.photon_number(), topo);
  const auto psi0 = build_initial_state(init, basis);
  const auto states = SpectralPropagator(build_hamiltonian(p, basis, topo), p.energy_unit()).evolve(psi0, grid);
  std::vector<PlotSeries> plots;
  json metrics = json::array();
  for (const auto& pr : c.at("pairs")) {
    const auto [k, kp] = pair_of(pr);
    CorrelationSeries series = correlation(k, kp, states, grid, basis);
    series.metadata.push_back({"initial", init.describe()});
    w.csv(csv_name_for_pair(k, kp), correlation_table(series));
    plots.push_back({"G(" + std::to_string(k) + "," + std::to_string(kp) + ")", series.times, series.values});
    metrics.push_back({{"pair", {k, kp}}, {"max", peak_value(series)}, {"contrast", contrast(series)},
                       {"first_peak_time", first_peak_time(series)}});
  }
  if (c.at("svg").get<bool>()) w.text("correlation.svg", line_plot_svg("two-point correlation", "Omega_R t", "G", plots));
  s["metrics"] = metrics;
}

void run_disorder(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s,
                  int jobs) {
  const json& c = m.config;
  const double unit = reduced_unit(m);
  DisorderSpec spec;
  spec.kappa1 = c.at("kappa1").get<double>() * unit;
  spec.kappa2 = c.at("kappa2").get<double>() * unit;
  spec.master_seed = c.at("seed");
  spec.realizations = c.at("realizations");
  spec.validate();
  const InitialStateSpec init = initial_of(c.at("initial"));
  const TimeGrid grid = grid_of(c);
  const auto [k, kp] = pair_of(c.at("pair"));
  const DisorderCorrelation ens = disorder_correlation(init, k, kp, spec, p, grid, topo, jobs);
  w.csv("ensemble.csv", ensemble_table(ens));

  // Uniform run at the interval midpoint, for comparison with the ensemble mean.
  DisorderSpec mid = spec;
  mid.kappa1 = mid.kappa2 = 0.5 * (spec.kappa1 + spec.kappa2);
  mid.realizations = 1;
  const DisorderCorrelation uniform = disorder_correlation(init, k, kp, mid, p, grid, topo, 1);
  CorrelationSeries midpoint = uniform.mean;
  midpoint.metadata = {{"kappa", format_double(mid.kappa1)}, {"initial", init.describe()}};
  w.csv("midpoint.csv", correlation_table(midpoint));
  s["mean_contrast"] = contrast(ens.mean);
  s["midpoint_contrast"] = contrast(midpoint);

  const int bounds_n = c.at("bounds_n");
  if (bounds_n > 0) {
    const DisorderBounds b = disorder_energy_bounds(spec, bounds_n, p, topo, jobs);
    CsvTable t;
    t.metadata = {{"n", std::to_string(bounds_n)}, {"e_kappa1", format_double(b.e_kappa1 / p.energy_unit())},
                  {"e_kappa2", format_double(b.e_kappa2 / p.energy_unit())},
                  {"violations", std::to_string(b.violations.size())}};
    t.header = {"realization", "seed", "ground_energy"};
    for (std::size_t r = 0; r < b.energies.size(); ++r) {
      t.add_row({std::to_string(r), std::to_string(b.seeds[r]), format_double(b.energies[r] / p.energy_unit())});
    }
    w.csv("bounds.csv", t);
    s["bound_violations"] = b.violations.size();
  }
  if (c.at("svg").get<bool>()) {
    w.text("ensemble.svg", line_plot_svg("disorder-averaged correlation", "Omega_R t", "G",
                                         {{"mean", ens.mean.times, ens.mean.values},
                                          {"uniform midpoint", midpoint.times, midpoint.values}}));
  }
}

void run_scan(const Manifest& m, const HamiltonianParams& p, const KagomeTopology& topo, Writer& w, json& s, int jobs) {
  const json& c = m.config;
  const std::string axis_name = c.at("axis");
  if (axis_name != "mu" && axis_name != "kappa") throw ValidationError("axis must be mu or kappa");
  const ScanAxis axis = axis_name == "mu" ? ScanAxis::mu : ScanAxis::kappa;
  const double unit = reduced_unit(m);
  const int points = c.at("points");
  if (points < 2) throw ValidationError("points must be >= 2");
  const double a = c.at("start").get<double>();
  const double b = c.at("stop").get<double>();
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) grid.push_back((a + (b - a) * i / (points - 1)) * unit);
  const ScanResult r = fixed_n_window_scan(axis, grid, p, c.at("n_min"), c.at("n_max"), topo, jobs);
  CsvTable t;
  t.header = {axis_name, "n_star"};
  for (int n = r.n_min; n <= r.n_max; ++n) t.header.push_back("E_" + std::to_string(n));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> row{format_double(grid[i] / unit), std::to_string(r.n_star[i])};
    for (double e : r.energies[i]) row.push_back(format_double(e / p.energy_unit()));
    t.add_row(row);
  }
  w.csv("scan.csv", t);
  CsvTable wt;
  wt.header = {"lower", "upper", "from", "to"};
  for (const auto& bd : r.boundaries) {
    wt.add_row({format_double(bd.lower / unit), format_double(bd.upper / unit), std::to_string(bd.from), std::to_string(bd.to)});
  }
  w.csv("windows.csv", wt);
  json widths = json::object();
  for (int n = r.n_min; n <= r.n_max; ++n) widths[std::to_string(n)] = r.window_width(n) / unit;
  s["window_widths"] = widths;
  s["ties"] = r.ties;
}

void run_topology(const KagomeTopology& topo, Writer& w, json& s) {
  CsvTable sites;
  sites.header = {"site", "role", "x", "y", "degree"};
  for (int k = 1; k <= kNumSites; ++k) {
    const Point2 pt = topo.coordinate(k);
    sites.add_row({std::to_string(k), topo.role(k) == SiteRole::inner ? "inner" : "outer", format_double(pt.x),
                   format_double(pt.y), std::to_string(topo.degree(k))});
  }
  w.csv("sites.csv", sites);
  CsvTable bonds;
  bonds.header = {"k", "k_prime"};
  for (const Bond& b : topo.bonds()) bonds.add_row({std::to_string(b.a), std::to_string(b.b)});
  w.csv("bonds.csv", bonds);
  w.text("edges.txt", topo.edge_list());
  s["bonds"] = topo.bonds().size();
  s["violations"] = validate(topo).size();
}

std::filesystem::path output_dir(const Manifest& m, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  const std::string configured = m.config.at("output");
  if (!configured.empty()) return configured;
  const char* root = std::getenv("KAGOME_OUT");
  return std::filesystem::path(root && *root ? root : "out") / m.kind;
}

void print_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
}

}  // namespace

const std::vector<std::string>& manifest_kinds() {
  static const std::vector<std::string> kinds = {"ed-spectrum", "peps-optimize", "benchmark", "dynamics",
                                                 "disorder-dynamics", "mu-scan", "topology-export"};
  return kinds;
}

std::vector<ManifestField> manifest_schema(const std::string& kind) {
  auto fields = common_fields();
  for (auto& f : kind_fields(kind)) fields.push_back(std::move(f));
  return fields;
}

std::string describe(const std::string& kind) {
  std::ostringstream os;
  os << "kind: " << kind << "\n";
  for (const auto& f : manifest_schema(kind)) {
    os << "  " << f.key << " (" << f.type << ") ";
    os << (f.default_value.is_null() ? std::string("required") : "default " + f.default_value.dump());
    os << "\n      " << f.help << "\n";
  }
  return os.str();
}

std::string Manifest::hash() const {
  json c = config;
  c.erase("output");
  return sha256_hex(c.dump());
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &config;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty()) throw ParseError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    pos = dot + 1;
  }
}

Manifest parse_manifest(const std::string& text, const std::vector<std::string>& overrides) {
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!raw.is_object()) throw ParseError("manifest must be a JSON object");
  for (const auto& o : overrides) apply_override(raw, o);
  if (!raw.contains("kind") || !raw["kind"].is_string()) throw ValidationError("manifest needs a string 'kind'");
  Manifest m;
  m.kind = raw["kind"];
  const auto schema = manifest_schema(m.kind);
  m.config = json::object();
  m.config["kind"] = m.kind;
  for (const auto& f : schema) {
    if (raw.contains(f.key)) {
      if (!type_matches(raw[f.key], f.type)) throw ValidationError("field '" + f.key + "' must be of type " + f.type);
      m.config[f.key] = raw[f.key];
    } else if (f.default_value.is_null()) {
      throw ValidationError("missing required field '" + f.key + "' for kind " + m.kind);
    } else {
      m.config[f.key] = f.default_value;
    }
  }
  for (const auto& [key, v] : raw.items()) {
    if (!m.config.contains(key)) throw ValidationError("unknown field '" + key + "' for kind " + m.kind);
  }
  const std::string units = m.config["units"];
  if (units != "reduced" && units != "si") throw ValidationError("units must be 'reduced' or 'si'");
  if (!(m.config["omega_r"].get<double>() > 0.0)) throw ValidationError("omega_r must be > 0");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), overrides);
}

HamiltonianParams manifest_params(const Manifest& m, const KagomeTopology& topology) {
  const json& c = m.config;
  const double omega_r = c.at("omega_r");
  const bool si = c.at("units") == "si";
  const double unit = si ? 1.0 : kHbar * omega_r;
  HamiltonianParams p = HamiltonianParams::uniform(topology, c.at("omega_d").get<double>() * (si ? 1.0 : omega_r),
                                                   c.at("kappa").get<double>() * unit, c.at("mu").get<double>() * unit,
                                                   omega_r);
  for (const auto& row : c.at("couplings")) {
    if (!row.is_array() || row.size() != 3 || !row[2].is_number()) {
      throw ValidationError("couplings entries are [k, k', kappa]");
    }
    const int a = site_of(row[0], "coupling site");
    const int b = site_of(row[1], "coupling site");
    if (!topology.has_bond(a, b)) {
      throw ValidationError("(" + std::to_string(a) + "," + std::to_string(b) + ") is not a bond of the cell");
    }
    p.couplings[make_bond(a, b)] = row[2].get<double>() * unit;
  }
  p.validate(topology);
  return p;
}

RunReport run_manifest(const Manifest& m, const std::filesystem::path& out_dir, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  const KagomeTopology topo = build_unit_cell();
  const HamiltonianParams p = manifest_params(m, topo);
  Writer w(out_dir, m);
  json s;
  s["kind"] = m.kind;
  s["config_hash"] = m.hash();
  s["version"] = kVersion;
  s["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                       std::to_string(EIGEN_MINOR_VERSION);
  s["config"] = m.config;
  json results = json::object();
  if (m.kind == "ed-spectrum") run_ed_spectrum(m, p, topo, w, results);
  else if (m.kind == "peps-optimize") run_peps(m, p, topo, w, results);
  else if (m.kind == "benchmark") run_benchmark(m, p, topo, w, results);
  else if (m.kind == "dynamics") run_dynamics(m, p, topo, w, results);
  else if (m.kind == "disorder-dynamics") run_disorder(m, p, topo, w, results, jobs);
  else if (m.kind == "mu-scan") run_scan(m, p, topo, w, results, jobs);
  else if (m.kind == "topology-export") run_topology(topo, w, results);
  else throw ParseError("unknown experiment kind '" + m.kind + "'");
  s["results"] = results;
  s["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json files = json::array();
  for (const auto& a : w.artifacts) files.push_back(a.filename().string());
  s["artifacts"] = files;
  write_atomic(out_dir / "summary.json", s.dump(2) + "\n");
  RunReport report;
  report.artifacts = w.artifacts;
  report.artifacts.push_back(out_dir / "summary.json");
  report.summary = std::move(s);
  return report;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return 2;
    case ErrorKind::capacity: return 4;
    case ErrorKind::numerical:
    case ErrorKind::singular_environment:
    case ErrorKind::contraction: return 5;
    default: return 3;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Photonic kagome cell: exact diagonalization, PEPS and dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string kind;
  std::string manifest_path;
  std::vector<std::string> overrides;
  int jobs = 1;
  std::string out;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run an experiment manifest");
  run->add_option("kind", kind, "experiment kind (must match the manifest)")->required();
  run->add_option("--manifest", manifest_path, "manifest path (JSON)")->required();
  run->add_option("--set", overrides, "override key=value (repeatable, dotted keys)");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory");
  run->add_option("--seed", seed, "master seed override");

  std::string describe_kind;
  auto* desc = app.add_subcommand("describe", "Print the manifest schema of a kind");
  desc->add_option("kind", describe_kind, "experiment kind")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("parse", e.what(), 2);
    return 2;
  }

  try {
    if (*desc) {
      std::cout << describe(describe_kind);
      return 0;
    }
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    const Manifest m = load_manifest(manifest_path, overrides);
    if (m.kind != kind) throw ValidationError("manifest kind '" + m.kind + "' does not match '" + kind + "'");
    const auto dir = output_dir(m, out);
    const RunReport report = run_manifest(m, dir, jobs);
    std::cout << report.summary.at("results").dump(2) << "\n";
    std::cout << "wrote " << report.artifacts.size() << " files to " << dir.string() << "\n";
    return 0;
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    print_error(std::string(to_string(e.kind())), e.what(), code);
    return code;
  } catch (const json::exception& e) {
    print_error("validation", e.what(), 3);
    return 3;
  } catch (const std::exception& e) {
    print_error("internal", e.what(), 5);
    return 5;
  }
}

}  // namespace kagome
