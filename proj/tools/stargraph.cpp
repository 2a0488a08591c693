#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "stargraph/checkpoint.hpp"
#include "stargraph/error.hpp"
#include "stargraph/io.hpp"

using namespace stargraph;
namespace fs = std::filesystem;

namespace {

// Every ExperimentConfig key as an optional flag; set flags win over the
// config file, which wins over built-in defaults.
struct Overrides {
  std::string config_path;
  std::optional<std::string> coupling, scheme, output_dir, label;
  std::optional<double> coupling_parameter, v, delta, T, x0, dx, dt, edge_length, margin, ratio_offset,
      far_end_mass_threshold;
  std::optional<std::size_t> phase3_snapshots, incoming_edge, check_interval;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--coupling", coupling, "kirchhoff | delta | delta-prime");
    app->add_option("--param,--coupling-parameter", coupling_parameter, "alpha~ or beta~");
    app->add_option("--v", v, "soliton velocity");
    app->add_option("--delta", delta, "exponent delta in (0,1)");
    app->add_option("--T", T, "phase-3 length multiplier (t3 = t2 + T ln v)");
    app->add_option("--x0", x0, "initial distance from the vertex");
    app->add_option("--dx", dx, "grid spacing");
    app->add_option("--dt", dt, "time step");
    app->add_option("--edge-length", edge_length, "edge length L");
    app->add_option("--margin", margin, "extra edge length past the radiation front");
    app->add_option("--scheme", scheme, "split-step-exact | crank-nicolson");
    app->add_option("--snapshots,--phase3-snapshots", phase3_snapshots, "phase-3 snapshot count");
    app->add_option("--ratio-offset", ratio_offset, "mass ratios at t2 + offset");
    app->add_option("--incoming-edge", incoming_edge, "edge the soliton starts on (0, 1, 2)");
    app->add_option("--far-threshold,--far-end-mass-threshold", far_end_mass_threshold, "truncation certificate");
    app->add_option("--check-interval", check_interval, "steps between conservation samples");
    app->add_option("-o,--out,--output-dir", output_dir, "output directory");
    app->add_option("--label", label, "run label (subdirectory name)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (coupling) c.coupling = parse_coupling_kind(*coupling);
    if (scheme) c.scheme = parse_scheme(*scheme);
    if (output_dir) c.output_dir = *output_dir;
    if (label) c.label = *label;
    if (coupling_parameter) c.coupling_parameter = *coupling_parameter;
    if (v) c.v = *v;
    if (delta) c.delta = *delta;
    if (T) c.T = *T;
    if (x0) c.x0 = x0;
    if (dx) c.dx = dx;
    if (dt) c.dt = dt;
    if (edge_length) c.edge_length = edge_length;
    if (margin) c.margin = *margin;
    if (ratio_offset) c.ratio_offset = *ratio_offset;
    if (far_end_mass_threshold) c.far_end_mass_threshold = *far_end_mass_threshold;
    if (phase3_snapshots) c.phase3_snapshots = *phase3_snapshots;
    if (incoming_edge) c.incoming_edge = *incoming_edge;
    if (check_interval) c.check_interval = *check_interval;
    c.validate();
    return c;
  }
};

fs::path run_dir(const ExperimentConfig& c) { return fs::path(c.output_dir.empty() ? "runs" : c.output_dir) / c.label; }

template <class F>
void write_stream(const fs::path& path, F&& body) {
  std::ostringstream o;
  body(o);
  write_text_file(path, o.str());
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return 2;
    case ErrorCode::domain_truncation_violation: return 3;
    case ErrorCode::numeric_failure: return 4;
    case ErrorCode::checkpoint_version_mismatch:
    case ErrorCode::checkpoint_corrupt_header:
    case ErrorCode::checkpoint_shape_mismatch: return 5;
    case ErrorCode::io_failure: return 6;
  }
  return 1;
}

std::vector<double> log_points(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = n == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

CouplingChoice parse_choice(const std::string& text) {
  const auto colon = text.find(':');
  CouplingChoice c;
  c.kind = parse_coupling_kind(text.substr(0, colon));
  if (colon != std::string::npos) {
    try {
      c.parameter = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::invalid_parameter, "bad coupling parameter in '" + text + "'");
    }
  }
  return c;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const Overrides& o) {
  const ExperimentConfig c = o.resolve();
  const fs::path dir = run_dir(c);
  RunManifest m;
  m.command = "simulate";
  m.config = config_to_json(c);
  m.resolved = resolved_to_json(c);
  std::cout << "simulate " << to_string(c.coupling) << " param " << c.coupling_parameter << " v " << c.v << " -> "
            << dir.string() << std::endl;

  const ExperimentReport r = run_scattering_experiment(c);
  m.certificates = certificates_for(r);
  write_text_file(dir / "report.json", report_to_json(r).dump(2) + "\n");
  m.add_output(dir, "report.json", "report");
  write_stream(dir / "phase3.csv", [&](std::ostream& s) { write_phase3_csv(r, s); });
  m.add_output(dir, "phase3.csv", "csv");
  write_stream(dir / "trace.csv", [&](std::ostream& s) { r.trace.write_csv(s); });
  m.add_output(dir, "trace.csv", "csv");
  write_stream(dir / "final_state.csv", [&](std::ostream& s) { write_field_csv(r.final_state, s); });
  m.add_output(dir, "final_state.csv", "csv");
  checkpoint_save(r.final_state, dir / "final_state.gnls");
  m.add_output(dir, "final_state.gnls", "checkpoint");
  for (std::size_t j = 0; j < kEdges; ++j) {
    const std::string name = "reference_phi" + std::to_string(j + 1) + ".gnls";
    checkpoint_save(r.reference_final[j], dir / name);
    m.add_output(dir, name, "checkpoint");
  }
  m.write(dir / "manifest.json");

  std::cout << std::scientific << std::setprecision(4) << "  e1 " << r.e1 << "  e2 " << r.e2 << "  e3_sup " << r.e3_sup
            << "\n  ratios at t2+" << std::defaultfloat << c.ratio_offset << std::scientific << ": "
            << r.at_ratio_time.ratio[0] << ' ' << r.at_ratio_time.ratio[1] << ' ' << r.at_ratio_time.ratio[2]
            << "  (expected " << r.expected_ratio[0] << ' ' << r.expected_ratio[1] << ' ' << r.expected_ratio[2]
            << ")\n  mass drift " << r.mass_drift << "  energy drift " << r.energy_drift << "  steps " << r.steps
            << '\n';
  return 0;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(const Overrides& o, const std::vector<double>& v_list, const std::vector<std::string>& couplings,
              std::size_t workers) {
  ExperimentConfig c = o.resolve();
  std::vector<CouplingChoice> choices;
  for (const auto& s : couplings) choices.push_back(parse_choice(s));
  const fs::path dir = run_dir(c);
  RunManifest m;
  m.command = "sweep";
  m.config = config_to_json(c);
  json vs = v_list, cs = json::array();
  for (const auto& ch : choices) cs.push_back(ch.name());
  m.resolved = {{"v_list", vs}, {"couplings", cs}, {"workers", workers}};

  const SweepResult res = run_sweep(c, v_list, choices, workers);
  std::size_t failed = 0;
  for (const auto& r : res.rows) {
    std::cout << std::left << std::setw(18) << r.coupling.name() << " v " << std::setw(6) << r.v;
    if (r.ok) {
      std::cout << std::scientific << std::setprecision(3) << " e1 " << r.e1 << " e2 " << r.e2 << " e3 " << r.e3_sup
                << " ratio err " << r.ratio_error_max << std::defaultfloat << '\n';
    } else {
      ++failed;
      std::cout << " FAILED " << r.error << '\n';
    }
  }
  for (const auto& s : res.slopes)
    std::cout << "slopes " << s.coupling.name() << ": e2 " << s.e2 << " e3_sup " << s.e3_sup << " ratio err "
              << s.ratio_error << '\n';
  json cert = json::array();
  for (const auto& r : res.rows)
    cert.push_back({{"coupling", r.coupling.name()}, {"v", r.v}, {"ok", r.ok}, {"mass_drift", r.mass_drift}});
  m.certificates = cert;
  write_stream(dir / "sweep.csv", [&](std::ostream& s) { res.write_csv(s); });
  m.add_output(dir, "sweep.csv", "csv");
  write_stream(dir / "slopes.csv", [&](std::ostream& s) { res.write_slopes_csv(s); });
  m.add_output(dir, "slopes.csv", "csv");
  m.write(dir / "manifest.json");
  return failed == 0 ? 0 : 1;
}

// --- verify -----------------------------------------------------------------

int cmd_verify(const std::string& suite, const std::string& json_path) {
  const auto results = verify(suite);
  std::size_t failed = 0;
  json out = json::array();
  for (const auto& r : results) {
    if (!r.passed) ++failed;
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(14) << r.suite << ' ' << std::setw(44)
              << r.name << ' ' << std::scientific << std::setprecision(3) << r.measured << " (thr " << r.threshold
              << ") " << r.detail << std::defaultfloat << '\n';
    out.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"passed", r.passed},
                   {"measured", r.measured},
                   {"threshold", r.threshold},
                   {"detail", r.detail}});
  }
  std::cout << results.size() - failed << '/' << results.size() << " checks passed\n";
  if (!json_path.empty()) write_text_file(json_path, out.dump(2) + "\n");
  return failed == 0 ? 0 : 1;
}

// --- kernels ----------------------------------------------------------------

int cmd_kernels(std::vector<double> ks, const std::vector<double>& strengths, const std::vector<double>& vs,
                const std::string& out_dir) {
  if (ks.empty()) ks = log_points(0.1, 100.0, 20);
  std::vector<VertexCoupling> couplings{VertexCoupling::kirchhoff()};
  for (double s : strengths) {
    couplings.push_back(VertexCoupling::delta(s));
    couplings.push_back(VertexCoupling::delta_prime(s));
  }

  std::ostringstream scat;
  scat << "coupling,strength,k,r_re,r_im,t_re,t_im,unitarity_defect\n" << std::setprecision(17);
  for (const auto& c : couplings)
    for (double k : ks) {
      const auto s = scattering_coefficients(c, k);
      scat << to_string(c.kind) << ',' << c.strength << ',' << k << ',' << s.r.real() << ',' << s.r.imag() << ','
           << s.t.real() << ',' << s.t.imag() << ',' << std::norm(s.r) + 2.0 * std::norm(s.t) - 1.0 << '\n';
    }

  std::ostringstream resc;
  resc << "coupling,parameter,v,r_re,r_im,t_re,t_im,direct_r_re,direct_r_im,direct_t_re,direct_t_im\n"
       << std::setprecision(17);
  for (auto kind : {CouplingKind::kirchhoff, CouplingKind::delta, CouplingKind::delta_prime})
    for (double p : strengths)
      for (double v : vs) {
        const auto a = rescaled_coefficients(kind, p, v);
        const auto b = rescaled_via_direct(kind, p, v);
        resc << to_string(kind) << ',' << p << ',' << v << ',' << a.r.real() << ',' << a.r.imag() << ','
             << a.t.real() << ',' << a.t.imag() << ',' << b.r.real() << ',' << b.r.imag() << ',' << b.t.real()
             << ',' << b.t.imag() << '\n';
      }

  std::ostringstream res;
  res << "coupling,strength,k_re,k_im,x,y,diag_re,diag_im,off_re,off_im\n" << std::setprecision(17);
  for (const auto& c : couplings)
    for (cplx k : {cplx{1.0, 0.5}, cplx{2.0, 1.0}})
      for (double x : {0.0, 0.5, 1.0})
        for (double y : {0.0, 1.0}) {
          const auto K = resolvent_kernel(c, k, x, y);
          res << to_string(c.kind) << ',' << c.strength << ',' << k.real() << ',' << k.imag() << ',' << x << ','
              << y << ',' << K[0][0].real() << ',' << K[0][0].imag() << ',' << K[0][1].real() << ','
              << K[0][1].imag() << '\n';
        }

  std::ostringstream ident;
  ident << "a,t,z,lhs_re,lhs_im,rhs_re,rhs_im,abs_diff\n" << std::setprecision(17);
  for (double a : {0.5, 1.0, 2.0})
    for (double t : {0.5, 1.0, 2.0})
      for (double z : {0.5, 1.0, 2.0}) {
        const auto v = kernel_identity_check(a, t, z);
        ident << a << ',' << t << ',' << z << ',' << v.lhs.real() << ',' << v.lhs.imag() << ',' << v.rhs.real()
              << ',' << v.rhs.imag() << ',' << std::abs(v.lhs - v.rhs) << '\n';
      }

  if (out_dir.empty()) {
    std::cout << scat.str();
    return 0;
  }
  const fs::path dir(out_dir);
  RunManifest m;
  m.command = "kernels";
  m.config = {{"k", ks}, {"strengths", strengths}, {"v", vs}};
  m.resolved = json::object();
  m.certificates = json::object();
  const std::vector<std::pair<std::string, std::string>> files{
      {"scattering.csv", scat.str()}, {"rescaled.csv", resc.str()}, {"resolvent.csv", res.str()},
      {"kernel_identity.csv", ident.str()}};
  for (const auto& [name, text] : files) {
    write_text_file(dir / name, text);
    m.add_output(dir, name, "csv");
  }
  m.write(dir / "manifest.json");
  std::cout << "wrote " << files.size() << " tables to " << dir.string() << '\n';
  return 0;
}

// --- plotdata ---------------------------------------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    fail(ErrorCode::invalid_parameter, "column '" + name + "' missing");
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_failure, "cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::invalid_parameter, path.string() + " is empty");
  t.header = split_csv(line);
  while (std::getline(in, line))
    if (!line.empty()) t.rows.push_back(split_csv(line));
  return t;
}

int cmd_plotdata(const std::string& input, std::string out_dir) {
  const fs::path in(input);
  if (out_dir.empty()) out_dir = input;
  const fs::path dir(out_dir);
  RunManifest m;
  m.command = "plotdata";
  m.config = {{"input", input}};
  m.resolved = json::object();
  m.certificates = json::object();
  bool any = false;

  if (fs::exists(in / "sweep.csv")) {
    const Table t = read_csv(in / "sweep.csv");
    const auto cv = t.col("v"), cc = t.col("coupling"), cp = t.col("parameter"), cs = t.col("status"),
               c1 = t.col("e1"), c2 = t.col("e2"), c3 = t.col("e3_sup"), cr = t.col("ratio_err_max");
    std::ostringstream o;
    o << "coupling,parameter,v,e1,e2,e3_sup,ratio_err_max\n";
    for (const auto& r : t.rows)
      if (r.at(cs) == "ok")
        o << r.at(cc) << ',' << r.at(cp) << ',' << r.at(cv) << ',' << r.at(c1) << ',' << r.at(c2) << ',' << r.at(c3)
          << ',' << r.at(cr) << '\n';
    write_text_file(dir / "error_vs_v.csv", o.str());
    m.add_output(dir, "error_vs_v.csv", "csv");
    any = true;
  }
  if (fs::exists(in / "trace.csv")) {
    const Table t = read_csv(in / "trace.csv");
    const auto ct = t.col("t"), cm = t.col("mass");
    const std::array<std::size_t, kEdges> ce{t.col("mass_edge1"), t.col("mass_edge2"), t.col("mass_edge3")};
    std::ostringstream o;
    o << "t,ratio_edge1,ratio_edge2,ratio_edge3\n" << std::setprecision(17);
    for (const auto& r : t.rows) {
      const double total = std::stod(r.at(cm));
      o << r.at(ct);
      for (auto c : ce) o << ',' << (total > 0.0 ? std::sqrt(std::stod(r.at(c)) / total) : 0.0);
      o << '\n';
    }
    write_text_file(dir / "mass_ratio_vs_t.csv", o.str());
    m.add_output(dir, "mass_ratio_vs_t.csv", "csv");
    any = true;
  }
  require(any, "no sweep.csv or trace.csv in " + input);
  m.write(dir / "plotdata_manifest.json");
  for (const auto& f : m.outputs) std::cout << "wrote " << (dir / f.name).string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soliton scattering on a three-edge star graph"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Overrides sim;
  auto* simulate = app.add_subcommand("simulate", "run one fast-soliton scattering experiment");
  sim.attach(simulate);

  Overrides sw;
  std::vector<double> v_list{8.0, 16.0, 32.0};
  std::vector<std::string> couplings{"kirchhoff", "delta:1", "delta-prime:1"};
  std::size_t workers = 1;
  auto* sweep = app.add_subcommand("sweep", "run experiments over velocities and couplings");
  sw.attach(sweep);
  sweep->add_option("--v-list", v_list, "increasing velocities")->delimiter(',');
  sweep->add_option("--couplings", couplings, "kind[:parameter], e.g. delta:1 or delta-prime:1")->delimiter(',');
  sweep->add_option("-j,--workers", workers, "concurrent runs");

  std::string suite = "all", verify_json;
  auto* ver = app.add_subcommand("verify", "run verification suites");
  ver->add_option("-s,--suite", suite, "suite name or 'all'");
  ver->add_option("--json", verify_json, "also write results as JSON");

  std::vector<double> ks, strengths{0.1, 1.0, 10.0}, kv{8.0, 16.0, 32.0};
  std::string kernels_out;
  auto* kern = app.add_subcommand("kernels", "tabulate scattering data, resolvent samples and the kernel identity");
  kern->add_option("--k", ks, "wavenumbers (default 20 log points in [0.1, 100])")->delimiter(',');
  kern->add_option("--strengths", strengths, "alpha / beta values")->delimiter(',');
  kern->add_option("--v", kv, "velocities for the rescaled coefficients")->delimiter(',');
  kern->add_option("-o,--out", kernels_out, "output directory (stdout if omitted)");

  std::string plot_in, plot_out;
  auto* plot = app.add_subcommand("plotdata", "column files for error-vs-v and mass-ratio-vs-t plots");
  plot->add_option("-i,--input", plot_in, "run or sweep directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("-o,--out", plot_out, "output directory (default: input)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*sweep) return cmd_sweep(sw, v_list, couplings, workers);
    if (*ver) {
      if (suite != "all") {
        const auto names = verify_suite_names();
        if (std::find(names.begin(), names.end(), suite) == names.end())
          fail(ErrorCode::invalid_parameter, "unknown suite '" + suite + "'");
      }
      return cmd_verify(suite, verify_json);
    }
    if (*kern) return cmd_kernels(ks, strengths, kv, kernels_out);
    if (*plot) return cmd_plotdata(plot_in, plot_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
