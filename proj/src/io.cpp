#include "kagome/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "kagome/errors.hpp"

namespace kagome {

namespace {

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ParseError("bad float '" + s + "' in checkpoint");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ArgumentError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ArgumentError("rename to " + path.string() + " failed: " + ec.message());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (!header.empty() && row.size() != header.size()) throw ArgumentError("csv row width does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::ostringstream os;
  for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << '\n';
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string csv_body(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    if (line.empty() || line.front() != '#') {
      out.append(line);
      out += '\n';
    }
    pos = end + 1;
  }
  return out;
}

CsvTable trace_table(const OptimizationTrace& trace) {
  CsvTable t;
  t.header = {"sweep", "energy_over_hbar_OmegaR", "delta_E", "max_deviation", "regularized", "reinitialized"};
  for (const TraceRow& r : trace.rows) {
    t.add_row({std::to_string(r.sweep), format_double(r.energy), format_double(r.delta_e),
               format_double(r.max_deviation), r.regularized ? "1" : "0", r.reinitialized ? "1" : "0"});
  }
  return t;
}

CsvTable correlation_table(const CorrelationSeries& series) {
  CsvTable t;
  t.metadata = series.metadata;
  t.metadata.insert(t.metadata.begin(), {"pair", std::to_string(series.k) + "," + std::to_string(series.k_prime)});
  t.header = {"t_dimensionless", "G"};
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    t.add_row({format_double(series.times[i]), format_double(series.values[i])});
  }
  return t;
}

CsvTable ensemble_table(const DisorderCorrelation& ensemble) {
  CsvTable t;
  t.metadata = ensemble.mean.metadata;
  t.metadata.insert(t.metadata.begin(),
                    {"pair", std::to_string(ensemble.mean.k) + "," + std::to_string(ensemble.mean.k_prime)});
  for (std::size_t r = 0; r < ensemble.seeds.size(); ++r) {
    t.metadata.push_back({"seed_" + std::to_string(r), std::to_string(ensemble.seeds[r])});
  }
  t.header = {"realization", "t_dimensionless", "G"};
  for (std::size_t r = 0; r < ensemble.realizations.size(); ++r) {
    const auto& s = ensemble.realizations[r];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      t.add_row({std::to_string(r), format_double(s.times[i]), format_double(s.values[i])});
    }
  }
  for (std::size_t i = 0; i < ensemble.mean.values.size(); ++i) {
    t.add_row({"mean", format_double(ensemble.mean.times[i]), format_double(ensemble.mean.values[i])});
  }
  return t;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  constexpr double w = 640, h = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
     << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << h / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\" font-size=\"10\">" << xv
       << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << yv
       << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size() && i < series[s].y.size(); ++i) {
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
      os << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << w - mr - 4 << "\" y=\"" << mt + 14 * (s + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << color << "\">" << escape_xml(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

nlohmann::json checkpoint_json(const PepsState& state) {
  nlohmann::json j;
  const PepsConfig& c = state.config;
  j["format"] = "kagome-peps-checkpoint";
  j["version"] = 1;
  j["n_total"] = c.n_total;
  j["phys_dim"] = c.phys_dim;
  j["bond_cap"] = c.bond_cap;
  j["seed"] = c.seed;
  j["seed_used"] = state.seed_used;
  j["convergence_tol"] = hex_double(c.convergence_tol);
  j["max_sweeps"] = c.max_sweeps;
  j["regularization_eps"] = hex_double(c.regularization_eps);
  j["number_penalty"] = c.number_penalty ? nlohmann::json(hex_double(*c.number_penalty)) : nlohmann::json(nullptr);
  nlohmann::json bonds = nlohmann::json::array();
  for (const auto& [b, d] : c.bond_dims) bonds.push_back({b.a, b.b, d});
  j["bond_dims"] = bonds;
  nlohmann::json tensors = nlohmann::json::array();
  for (const PepsTensor& t : state.tensors) {
    nlohmann::json jt;
    jt["site"] = t.site;
    jt["shape"] = t.dims;
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < t.data.size(); ++i) {
      re.push_back(hex_double(t.data(i).real()));
      im.push_back(hex_double(t.data(i).imag()));
    }
    jt["re"] = re;
    jt["im"] = im;
    tensors.push_back(jt);
  }
  j["tensors"] = tensors;
  return j;
}

PepsState checkpoint_from_json(const nlohmann::json& j, const KagomeTopology& topology) {
  try {
    if (j.at("format") != "kagome-peps-checkpoint") throw ParseError("not a PEPS checkpoint");
    PepsState state{topology, {}, {}, 0};
    PepsConfig& c = state.config;
    c.n_total = j.at("n_total");
    c.phys_dim = j.at("phys_dim");
    c.bond_cap = j.at("bond_cap");
    c.seed = j.at("seed");
    c.convergence_tol = parse_hex_double(j.at("convergence_tol"));
    c.max_sweeps = j.at("max_sweeps");
    c.regularization_eps = parse_hex_double(j.at("regularization_eps"));
    if (!j.at("number_penalty").is_null()) c.number_penalty = parse_hex_double(j.at("number_penalty"));
    for (const auto& b : j.at("bond_dims")) c.bond_dims[make_bond(b.at(0), b.at(1))] = b.at(2);
    c.validate(topology);
    state.seed_used = j.at("seed_used");
    const auto& tensors = j.at("tensors");
    if (tensors.size() != static_cast<std::size_t>(kNumSites)) throw ParseError("checkpoint needs 12 tensors");
    for (int k = 1; k <= kNumSites; ++k) {
      const auto& jt = tensors.at(k - 1);
      PepsTensor& t = state.at(k);
      t.site = jt.at("site");
      if (t.site != k) throw ParseError("checkpoint tensors out of order");
      t.dims = jt.at("shape").get<std::array<int, 5>>();
      if (t.dims != tensor_dims(c, k)) throw ParseError("tensor shape at site " + std::to_string(k) + " disagrees with bond dims");
      const auto& re = jt.at("re");
      const auto& im = jt.at("im");
      if (re.size() != t.size() || im.size() != t.size()) throw ParseError("tensor entry count mismatch");
      t.data.resize(static_cast<Eigen::Index>(t.size()));
      for (std::size_t i = 0; i < t.size(); ++i) {
        t.data(static_cast<Eigen::Index>(i)) = cplx(parse_hex_double(re.at(i)), parse_hex_double(im.at(i)));
      }
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const PepsState& state) {
  write_atomic(path, checkpoint_json(state).dump(1) + "\n");
}

PepsState load_checkpoint(const std::filesystem::path& path, const KagomeTopology& topology) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return checkpoint_from_json(j, topology);
}

}  // namespace kagome
