#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stargraph/harness.hpp"

namespace stargraph {

using json = nlohmann::ordered_json;

/// Build version, also written into every manifest.
const char* tool_version() noexcept;

/// Keys mirror ExperimentConfig field names; optional fields are null when
/// unset. Unknown keys are an invalid_parameter error, so a typo cannot be
/// silently ignored.
json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Effective values after defaults are applied (x0, dx, dt, edge length, grid,
/// schedule).
json resolved_to_json(const ExperimentConfig& config);

json report_to_json(const ExperimentReport& report);

/// t, mismatch, mass, ratio_edge1..3 for each phase-3 snapshot.
void write_phase3_csv(const ExperimentReport& report, std::ostream& out);

/// x, then re/im column pairs per edge.
void write_field_csv(const GraphField& field, std::ostream& out);

struct OutputFile {
  std::string name;  // relative to the manifest directory
  std::uintmax_t bytes = 0;
  std::string kind;
};

struct RunManifest {
  std::string command;
  json config;        // as given (after flag overrides)
  json resolved;      // after defaults
  json certificates;  // truncation and conservation figures
  std::vector<OutputFile> outputs;

  /// Stats `name` inside `dir` and records it.
  void add_output(const std::filesystem::path& dir, const std::string& name, const std::string& kind);
  json to_json() const;
  void write(const std::filesystem::path& path) const;
};

json certificates_for(const ExperimentReport& report);

/// Writes `text` to path, creating parent directories. io_failure on error.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stargraph
