#include "stargraph/io.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "stargraph/error.hpp"

#ifndef STARGRAPH_VERSION
#define STARGRAPH_VERSION "0.0.0"
#endif

namespace stargraph {

const char* tool_version() noexcept { return STARGRAPH_VERSION; }

namespace {

template <class T>
json opt(const std::optional<T>& x) {
  return x ? json(*x) : json(nullptr);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::invalid_parameter, std::string("config key '") + key + "': " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v);
  out = v;
}

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json triple(const std::array<double, kEdges>& a) { return json::array({a[0], a[1], a[2]}); }

json snapshot_json(const SnapshotMetrics& s) {
  return {{"t", s.t}, {"mismatch", s.mismatch}, {"mass", s.mass}, {"ratio", triple(s.ratio)}};
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  return {{"coupling", to_string(c.coupling)},
          {"coupling_parameter", c.coupling_parameter},
          {"v", c.v},
          {"delta", c.delta},
          {"T", c.T},
          {"x0", opt(c.x0)},
          {"dx", opt(c.dx)},
          {"dt", opt(c.dt)},
          {"edge_length", opt(c.edge_length)},
          {"margin", c.margin},
          {"scheme", to_string(c.scheme)},
          {"phase3_snapshots", c.phase3_snapshots},
          {"ratio_offset", c.ratio_offset},
          {"incoming_edge", c.incoming_edge},
          {"far_end_mass_threshold", c.far_end_mass_threshold},
          {"check_interval", c.check_interval},
          {"output_dir", c.output_dir},
          {"label", c.label}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known = {
      "coupling", "coupling_parameter", "v", "delta", "T", "x0", "dx", "dt", "edge_length", "margin", "scheme",
      "phase3_snapshots", "ratio_offset", "incoming_edge", "far_end_mass_threshold", "check_interval", "output_dir",
      "label"};
  for (const auto& [key, _] : j.items()) require(known.count(key) > 0, "unknown config key '" + key + "'");

  std::string coupling = to_string(c.coupling);
  read(j, "coupling", coupling);
  c.coupling = parse_coupling_kind(coupling);
  std::string scheme = to_string(c.scheme);
  read(j, "scheme", scheme);
  c.scheme = parse_scheme(scheme);
  read(j, "coupling_parameter", c.coupling_parameter);
  read(j, "v", c.v);
  read(j, "delta", c.delta);
  read(j, "T", c.T);
  read(j, "x0", c.x0);
  read(j, "dx", c.dx);
  read(j, "dt", c.dt);
  read(j, "edge_length", c.edge_length);
  read(j, "margin", c.margin);
  read(j, "phase3_snapshots", c.phase3_snapshots);
  read(j, "ratio_offset", c.ratio_offset);
  read(j, "incoming_edge", c.incoming_edge);
  read(j, "far_end_mass_threshold", c.far_end_mass_threshold);
  read(j, "check_interval", c.check_interval);
  read(j, "output_dir", c.output_dir);
  read(j, "label", c.label);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::invalid_parameter, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json resolved_to_json(const ExperimentConfig& c) {
  const PhaseSchedule s = c.schedule();
  const GridSpec g = c.grid();
  return {{"x0", c.resolved_x0()},
          {"dx", g.dx},
          {"dt", c.resolved_dt()},
          {"edge_length", g.length()},
          {"n_points", g.n_points},
          {"horizon", c.horizon()},
          {"schedule", {{"t1", s.t1}, {"t2", s.t2}, {"t3", s.t3}}},
          {"physical_coupling", {{"kind", to_string(c.physical_coupling().kind)},
                                 {"strength", c.physical_coupling().strength}}}};
}

json report_to_json(const ExperimentReport& r) {
  json phase3 = json::array();
  for (const auto& s : r.phase3) phase3.push_back(snapshot_json(s));
  return {{"config", config_to_json(r.config)},
          {"schedule", {{"x0", r.x0}, {"t1", r.schedule.t1}, {"t2", r.schedule.t2}, {"t3", r.schedule.t3}}},
          {"grid", {{"dx", r.grid.dx}, {"n_points", r.grid.n_points}, {"edge_length", r.grid.length()}}},
          {"dt", r.dt},
          {"steps", r.steps},
          {"coefficients", {{"r", cplx_json(r.coeffs.r)}, {"t", cplx_json(r.coeffs.t)}}},
          {"e1", r.e1},
          {"e2", r.e2},
          {"e2_superposition", r.e2_superposition},
          {"e3_sup", r.e3_sup},
          {"phase3", phase3},
          {"ratio", {{"at", snapshot_json(r.at_ratio_time)},
                     {"expected", triple(r.expected_ratio)},
                     {"error", triple(r.ratio_error)},
                     {"error_max", r.ratio_error_max}}},
          {"certificates", certificates_for(r)}};
}

json certificates_for(const ExperimentReport& r) {
  return {{"far_end_mass_max", r.far_end_mass_max},
          {"far_end_mass_threshold", r.config.far_end_mass_threshold},
          {"line_rim_mass_max", r.line_rim_mass_max},
          {"mass_closure", r.mass_closure},
          {"mass_drift_max", r.mass_drift},
          {"mass_drift_final", r.mass_drift_final},
          {"energy_drift_max", r.energy_drift}};
}

void write_phase3_csv(const ExperimentReport& r, std::ostream& out) {
  out << "t,mismatch,mass,ratio_edge1,ratio_edge2,ratio_edge3\n" << std::setprecision(17);
  for (const auto& s : r.phase3)
    out << s.t << ',' << s.mismatch << ',' << s.mass << ',' << s.ratio[0] << ',' << s.ratio[1] << ',' << s.ratio[2]
        << '\n';
}

void write_field_csv(const GraphField& f, std::ostream& out) {
  f.validate();
  out << "x,re_edge1,im_edge1,re_edge2,im_edge2,re_edge3,im_edge3\n" << std::setprecision(17);
  for (std::size_t m = 0; m < f.grid.n_points; ++m) {
    out << f.grid.x(m);
    for (const auto& e : f.edges) out << ',' << e[m].real() << ',' << e[m].imag();
    out << '\n';
  }
}

void RunManifest::add_output(const std::filesystem::path& dir, const std::string& name, const std::string& kind) {
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(dir / name, ec);
  if (ec) fail(ErrorCode::io_failure, "output " + (dir / name).string() + " missing from disk");
  outputs.push_back({name, bytes, kind});
}

json RunManifest::to_json() const {
  json files = json::array();
  for (const auto& o : outputs) files.push_back({{"name", o.name}, {"kind", o.kind}, {"bytes", o.bytes}});
  return {{"tool", "stargraph"},
          {"version", tool_version()},
          {"command", command},
          {"config", config},
          {"resolved", resolved},
          {"certificates", certificates},
          {"outputs", files}};
}

void RunManifest::write(const std::filesystem::path& path) const { write_text_file(path, to_json().dump(2) + "\n"); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::io_failure, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::io_failure, "write to " + path.string() + " failed");
}

}  // namespace stargraph
