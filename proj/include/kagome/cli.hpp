#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kagome/errors.hpp"
#include "kagome/fock.hpp"

namespace kagome {

inline constexpr const char* kVersion = "1.0.0";

/// Experiment kinds accepted by `run` and `describe`.
const std::vector<std::string>& manifest_kinds();

struct ManifestField {
  std::string key;
  std::string type;  ///< number, integer, string, bool, array, object
  nlohmann::json default_value;  ///< null means required
  std::string help;
};

/// Every field of `kind`, common ones first. Throws ParseError for an unknown kind.
std::vector<ManifestField> manifest_schema(const std::string& kind);

/// Human-readable schema listing for `kind`.
std::string describe(const std::string& kind);

struct Manifest {
  std::string kind;
  /// Config with defaults filled in and overrides applied.
  nlohmann::json config;

  /// SHA-256 of the canonical text of `config`, excluding the output directory.
  std::string hash() const;
};

/// Applies "a.b=value" overrides; values parse as JSON when possible, else as strings.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Parses, fills defaults, applies overrides and validates.
Manifest parse_manifest(const std::string& text, const std::vector<std::string>& overrides = {});
Manifest load_manifest(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Physical parameters (J) from the manifest's unit convention.
HamiltonianParams manifest_params(const Manifest& manifest, const KagomeTopology& topology);

struct RunReport {
  std::vector<std::filesystem::path> artifacts;
  nlohmann::json summary;
};

/// Runs the experiment, writing every artifact plus summary.json into `out_dir`.
RunReport run_manifest(const Manifest& manifest, const std::filesystem::path& out_dir, int jobs = 1);

/// Process exit code for a library error kind.
int exit_code_for(ErrorKind kind);

/// Entry point of the command-line tool.
int run_cli(int argc, char** argv);

}  // namespace kagome
