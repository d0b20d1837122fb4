#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kagome/dynamics.hpp"
#include "kagome/peps.hpp"

namespace kagome {

std::string sha256_hex(std::string_view data);

/// Writes to a sibling temp file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

struct CsvTable {
  /// Emitted as "# key: value" lines ahead of the header row.
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string render() const;
};

/// Lines not starting with '#'.
std::string csv_body(std::string_view text);

CsvTable trace_table(const OptimizationTrace& trace);
CsvTable correlation_table(const CorrelationSeries& series);
/// Long format with a realization column; the mean is written as realization "mean".
CsvTable ensemble_table(const DisorderCorrelation& ensemble);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line chart.
std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

/// Config, seed and every tensor entry (hex floats, bit-exact round trip).
nlohmann::json checkpoint_json(const PepsState& state);
PepsState checkpoint_from_json(const nlohmann::json& j, const KagomeTopology& topology);
void save_checkpoint(const std::filesystem::path& path, const PepsState& state);
PepsState load_checkpoint(const std::filesystem::path& path, const KagomeTopology& topology);

}  // namespace kagome
