#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "stargraph/error.hpp"
#include "stargraph/harness.hpp"
#include "stargraph/propagator.hpp"

namespace stargraph {

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

GraphField gaussian_packet(const GridSpec& grid, double centre, double width, double carrier) {
  GraphField f = GraphField::zeros(grid);
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    const double x = grid.x(m);
    const double s = (x - centre) / width;
    f[0][m] = std::polar(std::exp(-0.5 * s * s), -carrier * x);
  }
  return f;
}

// Soliton on the line y in R, laid on edges 1 (y = x) and 2 (y = -x).
GraphField line_soliton(const GridSpec& grid, const SolitonParams& s, double t) {
  GraphField f = GraphField::zeros(grid);
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    const double x = grid.x(m);
    f[0][m] = s.value(x, t);
    f[1][m] = s.value(-x, t);
  }
  return f;
}

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << x;
  return o.str();
}

CheckResult below(std::string suite, std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(suite), std::move(name), std::isfinite(measured) && measured < threshold, measured, threshold,
          std::move(detail)};
}

std::vector<VertexCoupling> contract_couplings() {
  return {VertexCoupling::kirchhoff(), VertexCoupling::delta(1.0), VertexCoupling::delta(10.0),
          VertexCoupling::delta_prime(1.0), VertexCoupling::delta_prime(0.1)};
}

std::string label(const VertexCoupling& c) {
  if (c.kind == CouplingKind::kirchhoff) return "kirchhoff";
  std::ostringstream o;
  o << to_string(c.kind) << '(' << c.strength << ')';
  return o.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Building blocks

double scattering_unitarity_defect() {
  double worst = 0.0;
  std::vector<VertexCoupling> couplings{VertexCoupling::kirchhoff()};
  for (double s : {0.1, 1.0, 10.0}) {
    couplings.push_back(VertexCoupling::delta(s));
    couplings.push_back(VertexCoupling::delta_prime(s));
  }
  for (const auto& c : couplings)
    for (double k : log_grid(0.1, 100.0, 20)) worst = std::max(worst, std::abs(scattering_coefficients(c, k).unitarity_defect()));
  return worst;
}

PropagatorContract propagator_contract(const VertexCoupling& coupling) {
  const GridSpec grid = GridSpec::from_length(40.0, 0.02);
  const GraphField psi = gaussian_packet(grid, 12.0, 1.5, 5.0);
  const double t = 2.5;
  PropagatorContract out;
  const GraphField full = apply_linear_propagator(coupling, t, psi);
  const GraphField half = apply_linear_propagator(coupling, 0.5 * t, psi);
  out.semigroup = l2_distance(full, apply_linear_propagator(coupling, 0.5 * t, half));
  out.reversal = l2_distance(psi, apply_linear_propagator(coupling, -t, full));
  out.mass_drift = std::abs(mass(full) - mass(psi)) / mass(psi);
  out.delta0_vs_kirchhoff = l2_distance(apply_linear_propagator(VertexCoupling::delta(0.0), t, psi),
                                        apply_linear_propagator(VertexCoupling::kirchhoff(), t, psi));
  return out;
}

OrderStudy cross_scheme_study(const VertexCoupling& coupling, std::size_t levels) {
  require(levels >= 2, "order study needs at least two levels");
  OrderStudy study;
  const double t_end = 3.0;
  double dx = 0.04;
  for (std::size_t level = 0; level < levels; ++level, dx *= 0.5) {
    const double dt = 0.5 * dx;
    const GridSpec grid = GridSpec::from_length(40.0, dx);
    const GraphField psi = gaussian_packet(grid, 10.0, 1.5, 2.0);
    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    const CrankNicolson cn(grid, coupling, dt);
    GraphField f = psi;
    double prev = mass(f);
    for (std::size_t s = 0; s < steps; ++s) {
      cn.apply(f);
      const double m = mass(f);
      study.worst_step_mass_drift = std::max(study.worst_step_mass_drift, std::abs(m - prev) / prev);
      prev = m;
    }
    const GraphField exact = apply_linear_propagator(coupling, dt * static_cast<double>(steps), psi);
    study.steps.push_back(dt);
    study.errors.push_back(l2_distance(f, exact));
  }
  for (std::size_t i = 1; i < study.errors.size(); ++i) study.orders.push_back(std::log2(study.errors[i - 1] / study.errors[i]));
  return study;
}

ConservationRun conservation_run(double dx, double dt, std::size_t steps) {
  require(steps >= 1, "conservation run needs at least one step");
  const GridSpec grid = GridSpec::from_length(160.0, dx);
  // v = 2 soliton from x0 = 12 on edge 1, through the vertex by t ~ 6;
  // v = 1 would sit at E = -1/6 and magnify the relative drift
  const GraphField psi = initial_datum(12.0, 2.0, 0.5, grid);
  EvolveConfig config;
  config.dt = dt;
  config.conservation_check_interval = std::max<std::size_t>(1, steps / 100);
  const EvolveResult r = evolve(psi, 0.0, dt * static_cast<double>(steps), config);
  ConservationRun out;
  out.steps = r.steps;
  out.mass_drift = r.trace.max_abs_mass_drift();
  out.energy_drift = r.trace.max_abs_energy_drift();
  out.energy_drift_final = std::abs(r.trace.energy_drift().back());
  return out;
}

FidelityRun soliton_fidelity(double dx, double dt, const std::optional<LinearStageFactory>& linear) {
  const GridSpec grid = GridSpec::from_length(40.0, dx);
  const SolitonParams sol{-10.0, 4.0};  // from x = 10 on edge 2 to x = 10 on edge 1
  EvolveConfig config;
  config.dt = dt;
  config.two_edge = 1;
  config.linear_override = linear;
  config.conservation_check_interval = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.25 / dt)));
  config.record_energy = false;
  config.far_end_mass_threshold = 0.5;  // a corrupted stage must report, not throw
  FidelityRun out{dx, dt, 0.0};
  const Observer obs = [&](double t, const GraphField& f) {
    out.error = std::max(out.error, l2_distance(f, line_soliton(grid, sol, t)));
  };
  evolve(line_soliton(grid, sol, 0.0), 0.0, 5.0, config, {obs});
  return out;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

std::vector<CheckResult> suite_unitarity() {
  std::vector<CheckResult> out;
  out.push_back(below("unitarity", "scattering |r|^2+2|t|^2-1", scattering_unitarity_defect(), 1e-12,
                      "k in [0.1,100] x 20, alpha,beta in {0.1,1,10}"));
  double rescaled = 0.0;
  for (double v : {2.0, 8.0, 32.0})
    for (double p : {0.1, 1.0, 10.0})
      for (auto kind : {CouplingKind::kirchhoff, CouplingKind::delta, CouplingKind::delta_prime})
        rescaled = std::max(rescaled, std::abs(rescaled_coefficients(kind, p, v).unitarity_defect()));
  out.push_back(below("unitarity", "rescaled |r~|^2+2|t~|^2-1", rescaled, 1e-12));
  return out;
}

std::vector<CheckResult> suite_kernels() {
  std::vector<CheckResult> out;
  const auto kir = scattering_coefficients(VertexCoupling::kirchhoff(), 1.0);
  out.push_back(below("kernels", "kirchhoff r = -1/3, t = 2/3",
                      std::max(std::abs(kir.r + 1.0 / 3.0), std::abs(kir.t - 2.0 / 3.0)), 1e-15));
  const auto d = rescaled_coefficients(CouplingKind::delta, 1.0, 16.0);
  const cplx expected = -cplx(1.0, 2.0) / cplx(3.0, 2.0);
  out.push_back(below("kernels", "delta(1) r~ closed form", std::abs(d.r - expected), 1e-14));
  double paths = 0.0;
  for (double v : {2.0, 8.0, 16.0, 32.0, 100.0})
    for (double p : {0.1, 1.0, 10.0})
      for (auto kind : {CouplingKind::kirchhoff, CouplingKind::delta, CouplingKind::delta_prime}) {
        const auto a = rescaled_coefficients(kind, p, v);
        const auto b = rescaled_via_direct(kind, p, v);
        paths = std::max({paths, std::abs(a.r - b.r), std::abs(a.t - b.t)});
      }
  out.push_back(below("kernels", "rescaled vs direct at k = v/2", paths, 1e-14));
  double identity = 0.0;
  for (double a : {0.5, 1.0, 2.0})
    for (double t : {0.5, 1.0, 2.0})
      for (double z : {0.5, 1.0, 2.0}) {
        const auto k = kernel_identity_check(a, t, z);
        identity = std::max(identity, std::abs(k.lhs - k.rhs));
      }
  out.push_back(below("kernels", "kernel identity on {0.5,1,2}^3", identity, 1e-6));
  return out;
}

std::vector<CheckResult> suite_propagator() {
  std::vector<CheckResult> out;
  for (const auto& c : contract_couplings()) {
    const auto p = propagator_contract(c);
    out.push_back(below("propagator", label(c) + " semigroup", p.semigroup, 1e-8));
    out.push_back(below("propagator", label(c) + " time reversal", p.reversal, 1e-8));
    out.push_back(below("propagator", label(c) + " mass drift", p.mass_drift, 1e-8));
    if (c.kind == CouplingKind::kirchhoff)
      out.push_back(below("propagator", "delta(0) vs kirchhoff", p.delta0_vs_kirchhoff, 1e-14));
  }
  // the decoupled edge of H_1 is Dirichlet; the coupled pair is a free line
  const GridSpec grid = GridSpec::from_length(40.0, 0.02);
  GraphField psi = gaussian_packet(grid, 12.0, 1.5, 5.0);
  psi[2] = psi[0];
  const GraphField f = apply_two_edge_propagator(1, 2.5, psi);
  out.push_back(below("propagator", "two-edge H_1 mass drift", std::abs(mass(f) - mass(psi)) / mass(psi), 1e-8));
  return out;
}

std::vector<CheckResult> suite_conservation() {
  std::vector<CheckResult> out;
  const auto coarse = conservation_run(0.05, 0.002, 10000);
  const auto fine = conservation_run(0.05, 0.001, 20000);
  out.push_back(below("conservation", "mass drift, 1e4 steps", coarse.mass_drift, 1e-8));
  out.push_back(below("conservation", "energy drift, dx 0.05 dt 0.002", coarse.energy_drift, 1e-6,
                      "max over trace; final " + fmt(coarse.energy_drift_final)));
  const double order = std::log2(coarse.energy_drift / fine.energy_drift);
  out.push_back({"conservation", "energy drift order in dt", std::abs(order - 2.0) <= 0.3, order, 2.0,
                 "drift " + fmt(coarse.energy_drift) + " -> " + fmt(fine.energy_drift)});
  return out;
}

std::vector<CheckResult> suite_cross_scheme() {
  std::vector<CheckResult> out;
  for (const auto& c : {VertexCoupling::kirchhoff(), VertexCoupling::delta(1.0), VertexCoupling::delta_prime(1.0)}) {
    const auto s = cross_scheme_study(c, 4);
    const double worst = *std::min_element(s.orders.begin(), s.orders.end());
    std::string detail;
    for (double e : s.errors) detail += fmt(e) + " ";
    out.push_back({"cross-scheme", label(c) + " CN order", worst >= 1.8, worst, 1.8, detail});
    out.push_back(below("cross-scheme", label(c) + " CN mass drift per step", s.worst_step_mass_drift, 1e-10));
  }
  return out;
}

std::vector<CheckResult> suite_soliton() {
  std::vector<CheckResult> out;
  const auto a = soliton_fidelity(0.05, 0.002);
  const auto b = soliton_fidelity(0.025, 0.001);
  const auto c = soliton_fidelity(0.0125, 0.0005);
  out.push_back(below("soliton", "profile error dx 0.05 dt 0.002", a.error, 1e-3));
  out.push_back({"soliton", "error decreases under refinement", a.error > b.error && b.error > c.error, b.error / a.error,
                 1.0, fmt(a.error) + " > " + fmt(b.error) + " > " + fmt(c.error)});
  return out;
}

std::vector<CheckResult> suite_reference() {
  std::vector<CheckResult> out;
  double tail = 0.0;
  for (double v : {8.0, 16.0}) {
    const double y = std::pow(v, 0.6);
    const double closed = tail_mass_closed_form(y);
    tail = std::max(tail, std::abs(closed - tail_mass_quadrature(y)) / closed);
  }
  out.push_back(below("reference", "tail mass closed form vs quadrature", tail, 1e-10));

  // Phi^2 through the graph with H_2 and through the line must agree
  const double v = 8.0;
  const auto sched = phase_schedule(std::pow(v, 0.6), v, 0.4, 0.5);
  const auto coeffs = rescaled_coefficients(CouplingKind::kirchhoff, 1.0, v);
  const GridSpec grid = GridSpec::from_length(60.0, 0.05);
  const ReferenceBundle start = outgoing_profiles_at_t2(coeffs, sched, grid, 120.0);
  LineEvolveConfig lc;
  lc.dt = 2e-3;
  const double span = 1.0;
  const ReferenceBundle later = advance_reference(start, sched.t2 + span, lc);
  const auto f0 = start.fields(grid);
  const auto f1 = later.fields(grid);
  double drift = 0.0;
  for (std::size_t j = 0; j < 3; ++j) drift = std::max(drift, std::abs(mass(f1[j]) - mass(f0[j])) / mass(f0[j]));
  out.push_back(below("reference", "Phi^j mass conservation", drift, 1e-8));

  EvolveConfig ec;
  ec.dt = lc.dt;
  ec.two_edge = 2;
  ec.far_end_mass_threshold = 1e-8;
  const EvolveResult graph = evolve(f0[1], sched.t2, sched.t2 + span, ec);
  out.push_back(below("reference", "Phi^2 graph H_2 vs line", l2_distance(graph.field, f1[1]), 1e-8));

  // linear regime: tiny amplitude follows the two-edge propagator
  ReferenceBundle tiny = start;
  for (auto& z : tiny.phi_tr.values) z *= 1e-6;
  const auto t0 = tiny.fields(grid);
  const auto t1 = advance_reference(tiny, sched.t2 + span, lc).fields(grid);
  const GraphField lin = apply_two_edge_propagator(2, span, t0[1]);
  out.push_back(below("reference", "linear regime vs two-edge propagator", l2_distance(lin, t1[1]) / 1e-6, 1e-6,
                      "relative to amplitude"));
  return out;
}

std::vector<CheckResult> suite_decay() {
  std::vector<CheckResult> out;
  const GridSpec grid = GridSpec::from_length(400.0, 0.05);
  const GraphField psi = gaussian_packet(grid, 2.0, 0.5, 0.0);
  const auto times = log_grid(1.0, 100.0, 12);
  for (const auto& c : {VertexCoupling::kirchhoff(), VertexCoupling::delta(0.5), VertexCoupling::delta(5.0),
                        VertexCoupling::delta_prime(1.0)}) {
    const auto probe = dispersive_decay_probe(c, psi, times);
    out.push_back({"decay", label(c) + " sup-norm exponent", std::abs(probe.slope + 0.5) <= 0.1, probe.slope, -0.5,
                   "t in [1, 100]"});
  }
  return out;
}

std::vector<CheckResult> suite_negative_control() {
  // e^{+iHt} in place of e^{-iHt}: the fidelity check must catch it
  const LinearStageFactory corrupted = [](const GridSpec& grid, double dt) -> LinearStage {
    auto prop = std::make_shared<GraphPropagator>(grid, reflection_for_two_edge(1), -dt);
    return [prop](GraphField& f) { prop->apply(f); };
  };
  const auto run = soliton_fidelity(0.05, 0.002, corrupted);
  const bool caught = !(run.error < 1e-3);
  return {{"negative-control", "sign-flipped propagator fails soliton fidelity", caught, run.error, 1e-3,
           "passes when the fidelity check fails"}};
}

using Suite = std::function<std::vector<CheckResult>()>;

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> table{
      {"unitarity", suite_unitarity},       {"kernels", suite_kernels},
      {"propagator", suite_propagator},     {"conservation", suite_conservation},
      {"cross-scheme", suite_cross_scheme}, {"soliton", suite_soliton},
      {"reference", suite_reference},       {"decay", suite_decay},
      {"negative-control", suite_negative_control},
  };
  return table;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : suites()) names.push_back(name);
  names.push_back("all");
  return names;
}

std::vector<CheckResult> verify(const std::string& suite) {
  std::vector<CheckResult> out;
  bool found = false;
  for (const auto& [name, fn] : suites()) {
    if (suite != "all" && suite != name) continue;
    found = true;
    try {
      auto part = fn();
      out.insert(out.end(), part.begin(), part.end());
    } catch (const std::exception& e) {
      out.push_back({name, "suite raised", false, 0.0, 0.0, e.what()});
    }
  }
  if (!found) fail(ErrorCode::invalid_parameter, "unknown verify suite '" + suite + "'");
  return out;
}

}  // namespace stargraph
