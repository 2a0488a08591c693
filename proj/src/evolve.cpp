#include "stargraph/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "stargraph/error.hpp"
#include "stargraph/propagator.hpp"

namespace stargraph {

const char* to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::split_step_exact: return "split-step-exact";
    case Scheme::crank_nicolson: return "crank-nicolson";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "split-step-exact" || name == "splitstep" || name == "split") return Scheme::split_step_exact;
  if (name == "crank-nicolson" || name == "cn") return Scheme::crank_nicolson;
  fail(ErrorCode::invalid_parameter, "unknown scheme '" + name + "'");
}

void EvolveConfig::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  require(far_end_mass_threshold > 0.0 && far_end_mass_threshold < 1.0, "far-end threshold must lie in (0, 1)");
  require(far_end_fraction > 0.0 && far_end_fraction < 1.0, "far-end fraction must lie in (0, 1)");
  require(conservation_check_interval >= 1, "check interval must be at least one step");
  require(two_edge >= 0 && two_edge <= 3, "two_edge must be 0 (graph) or 1..3");
  require(two_edge == 0 || scheme == Scheme::split_step_exact, "two-edge runs use the split-step scheme");
  require(matched_wavenumber >= 0.0 && std::isfinite(matched_wavenumber), "matched wavenumber must be non-negative");
  coupling.validate();
}

void nonlinear_phase_inplace(GraphField& psi, double dt) {
  for (auto& e : psi.edges)
    for (auto& z : e) z *= std::polar(1.0, std::norm(z) * dt);
}

GraphField nonlinear_phase_step(const GraphField& psi, double dt) {
  GraphField out = psi;
  nonlinear_phase_inplace(out, dt);
  return out;
}

GraphField strang_step(const GraphField& psi, double dt, const VertexCoupling& coupling) {
  GraphField out = nonlinear_phase_step(psi, 0.5 * dt);
  GraphPropagator(psi.grid, reflection_for(coupling), dt).apply(out);
  nonlinear_phase_inplace(out, 0.5 * dt);
  return out;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson

void CrankNicolson::Chain::solve(std::vector<cplx>& d) const {
  const std::size_t n = diag_inv.size();
  d[0] *= diag_inv[0];
  for (std::size_t i = 1; i < n; ++i) d[i] = (d[i] - sub * d[i - 1]) * diag_inv[i];
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= upper_scaled[i] * d[i + 1];
}

CrankNicolson::CrankNicolson(const GridSpec& grid, const VertexCoupling& coupling, double dt)
    : grid_(grid), coupling_(coupling), dt_(dt), shared_vertex_(coupling.kind != CouplingKind::delta_prime) {
  grid.validate();
  coupling.validate();
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  const double dx = grid.dx;
  const cplx it{0.0, 0.5 * dt};  // i dt/2
  const std::size_t n = grid.n_points;
  const std::size_t len = shared_vertex_ ? n - 2 : n - 1;

  // rows: sub * x_{i-1} + diag_i * x_i + upper_i * x_{i+1}; the sub entry is
  // the same on every row.
  std::vector<cplx> diag(len, 1.0 + it * 2.0 / (dx * dx));
  std::vector<cplx> upper(len, -it / (dx * dx));
  chain_.sub = -it / (dx * dx);
  if (!shared_vertex_) upper[0] = -it * 2.0 / (dx * dx);

  chain_.diag_inv.resize(len);
  chain_.upper_scaled.resize(len);
  cplx prev_upper{};
  for (std::size_t i = 0; i < len; ++i) {
    const cplx den = diag[i] - (i > 0 ? chain_.sub * prev_upper : cplx{});
    if (std::abs(den) < 1e-300) fail(ErrorCode::numeric_failure, "Crank-Nicolson chain is singular");
    chain_.diag_inv[i] = 1.0 / den;
    prev_upper = upper[i] * chain_.diag_inv[i];
    chain_.upper_scaled[i] = prev_upper;
  }

  unit_response_.assign(len, cplx{});
  unit_response_[0] = 1.0;
  chain_.solve(unit_response_);

  if (shared_vertex_) {
    const double alpha = coupling.acts_as_kirchhoff() ? 0.0 : coupling.strength;
    const cplx d = 1.0 + it * (2.0 / (3.0 * dx)) * (3.0 / dx + alpha);
    const cplx c = -it * 2.0 / (3.0 * dx * dx);
    vertex_denominator_ = d - 3.0 * c * chain_.sub * unit_response_[0];
  } else {
    const cplx gamma = it * 2.0 / (dx * coupling.strength);
    vertex_denominator_ = 1.0 + 3.0 * gamma * unit_response_[0];
  }
  if (std::abs(vertex_denominator_) < 1e-300) fail(ErrorCode::numeric_failure, "Crank-Nicolson vertex solve is singular");
  for (auto& w : work_) w.resize(len);
}

void CrankNicolson::apply(GraphField& field) const {
  field.validate();
  require(field.grid == grid_, "field grid does not match the Crank-Nicolson stepper");
  const double dx = grid_.dx;
  const cplx it{0.0, 0.5 * dt_};
  const cplx hop = it / (dx * dx);
  const std::size_t n = grid_.n_points;

  if (shared_vertex_) {
    const double alpha = coupling_.acts_as_kirchhoff() ? 0.0 : coupling_.strength;
    const cplx u = (field[0][0] + field[1][0] + field[2][0]) / 3.0;
    cplx neighbours{};
    for (std::size_t j = 0; j < kEdges; ++j) neighbours += field[j][1];
    const cplx r0 = u - it * (2.0 / (3.0 * dx)) * ((3.0 / dx + alpha) * u - neighbours / dx);

    const cplx c = -it * 2.0 / (3.0 * dx * dx);
    cplx first{};
    for (std::size_t j = 0; j < kEdges; ++j) {
      const auto& psi = field[j];
      auto& r = work_[j];
      for (std::size_t m = 1; m + 1 < n; ++m) {
        const cplx left = m == 1 ? u : psi[m - 1];
        r[m - 1] = psi[m] - hop * (2.0 * psi[m] - left - psi[m + 1]);
      }
      chain_.solve(r);
      first += r[0];
    }
    const cplx u_new = (r0 - c * first) / vertex_denominator_;
    const cplx shift = u_new * chain_.sub;
    for (std::size_t j = 0; j < kEdges; ++j) {
      auto& psi = field[j];
      const auto& r = work_[j];
      psi[0] = u_new;
      for (std::size_t m = 1; m + 1 < n; ++m) psi[m] = r[m - 1] - shift * unit_response_[m - 1];
      psi[n - 1] = cplx{};
    }
    return;
  }

  const double beta = coupling_.strength;
  const cplx s_old = field[0][0] + field[1][0] + field[2][0];
  const cplx gamma = it * 2.0 / (dx * beta);
  cplx s_partial{};
  for (std::size_t j = 0; j < kEdges; ++j) {
    const auto& psi = field[j];
    auto& r = work_[j];
    r[0] = psi[0] - hop * 2.0 * (psi[0] - psi[1]) - gamma * s_old;
    for (std::size_t m = 1; m + 1 < n; ++m) r[m] = psi[m] - hop * (2.0 * psi[m] - psi[m - 1] - psi[m + 1]);
    chain_.solve(r);
    s_partial += r[0];
  }
  const cplx s_new = s_partial / vertex_denominator_;
  const cplx shift = gamma * s_new;
  for (std::size_t j = 0; j < kEdges; ++j) {
    auto& psi = field[j];
    const auto& r = work_[j];
    for (std::size_t m = 0; m + 1 < n; ++m) psi[m] = r[m] - shift * unit_response_[m];
    psi[n - 1] = cplx{};
  }
}

GraphField crank_nicolson_linear_step(const GraphField& psi, double dt, const VertexCoupling& coupling) {
  GraphField out = psi;
  CrankNicolson(psi.grid, coupling, dt).apply(out);
  return out;
}

GraphField crank_nicolson_step(const GraphField& psi, double dt, const VertexCoupling& coupling) {
  GraphField out = nonlinear_phase_step(psi, 0.5 * dt);
  CrankNicolson(psi.grid, coupling, dt).apply(out);
  nonlinear_phase_inplace(out, 0.5 * dt);
  return out;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const GridSpec& grid, double dt, const EvolveConfig& config) : dt_(dt) {
  config.validate();
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  if (config.linear_override) {
    linear_ = (*config.linear_override)(grid, dt);
  } else if (config.scheme == Scheme::crank_nicolson) {
    auto cn = std::make_shared<CrankNicolson>(grid, config.coupling, dt);
    linear_ = [cn](GraphField& f) { cn->apply(f); };
  } else {
    VertexReflection r =
        config.two_edge == 0 ? reflection_for(config.coupling) : reflection_for_two_edge(config.two_edge);
    r.matched_wavenumber = config.matched_wavenumber;
    auto prop = std::make_shared<GraphPropagator>(grid, r, dt);
    linear_ = [prop](GraphField& f) { prop->apply(f); };
  }
}

void Stepper::step(GraphField& field) const {
  nonlinear_phase_inplace(field, 0.5 * dt_);
  linear_(field);
  nonlinear_phase_inplace(field, 0.5 * dt_);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> relative_drift(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const double ref = v.front();
  const double scale = std::abs(ref) > 0.0 ? std::abs(ref) : 1.0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - ref) / scale;
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> EvolutionTrace::mass_drift() const { return relative_drift(mass); }
std::vector<double> EvolutionTrace::energy_drift() const { return relative_drift(energy); }
double EvolutionTrace::max_abs_mass_drift() const { return max_abs(mass_drift()); }
double EvolutionTrace::max_abs_energy_drift() const { return max_abs(energy_drift()); }

void EvolutionTrace::append(const EvolutionTrace& other) {
  // a segment starts where the previous one ended; drop the duplicate
  std::size_t skip = (!times.empty() && !other.times.empty() && other.times.front() == times.back()) ? 1 : 0;
  for (std::size_t i = skip; i < other.times.size(); ++i) {
    times.push_back(other.times[i]);
    mass.push_back(other.mass[i]);
    energy.push_back(other.energy[i]);
    edge_mass.push_back(other.edge_mass[i]);
    far_end_mass.push_back(other.far_end_mass[i]);
  }
}

void EvolutionTrace::write_csv(std::ostream& out) const {
  out << "t,mass,energy,mass_edge1,mass_edge2,mass_edge3,far_end_mass\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << times[i] << ',' << mass[i] << ',' << energy[i] << ',' << edge_mass[i][0] << ',' << edge_mass[i][1] << ','
        << edge_mass[i][2] << ',' << far_end_mass[i] << '\n';
  }
}

EvolveResult evolve(const GraphField& psi0, double t_start, double t_end, const EvolveConfig& config,
                    const std::vector<Observer>& observers) {
  config.validate();
  psi0.validate();
  require(t_start >= 0.0 && t_end >= t_start, "evolve needs 0 <= t_start <= t_end");

  EvolveResult result{psi0, {}, 0, 0.0};
  const double span = t_end - t_start;
  const auto steps = span > 0.0 ? static_cast<std::size_t>(std::ceil(span / config.dt - 1e-9)) : 0;
  const double dt = steps > 0 ? span / static_cast<double>(steps) : 0.0;
  result.steps = steps;
  result.dt_used = dt;

  const VertexCoupling energy_coupling = config.two_edge == 0 ? config.coupling : VertexCoupling::kirchhoff();
  std::optional<GraphPropagator> differentiator;
  if (config.record_energy && config.energy_rule == DerivativeRule::spectral)
    differentiator.emplace(psi0.grid,
                           config.two_edge == 0 ? reflection_for(config.coupling) : reflection_for_two_edge(config.two_edge),
                           0.0);
  const auto measure_energy = [&](const GraphField& f) {
    if (!config.record_energy) return 0.0;
    if (!differentiator) return energy(f, energy_coupling, DerivativeRule::finite_difference);
    const double quartic = std::pow(lp_norm(f, 4.0), 4.0);
    return 0.5 * linear_energy(f, energy_coupling, differentiator->derivative(f)) - 0.25 * quartic;
  };
  auto sample = [&](double t, const GraphField& f) {
    auto& tr = result.trace;
    tr.times.push_back(t);
    std::array<double, kEdges> em{};
    for (std::size_t j = 0; j < kEdges; ++j) em[j] = edge_mass(f, j);
    tr.edge_mass.push_back(em);
    tr.mass.push_back(em[0] + em[1] + em[2]);
    tr.energy.push_back(measure_energy(f));
    const double far = far_end_mass(f, config.far_end_fraction);
    tr.far_end_mass.push_back(far);
    if (far > config.far_end_mass_threshold) throw TruncationViolation(t, far, config.far_end_mass_threshold);
    for (const auto& obs : observers) obs(t, f);
  };

  sample(t_start, result.field);
  if (steps == 0) return result;
  const Stepper stepper(psi0.grid, dt, config);
  for (std::size_t s = 1; s <= steps; ++s) {
    stepper.step(result.field);
    if (s % config.conservation_check_interval == 0 || s == steps) {
      const double t = s == steps ? t_end : t_start + dt * static_cast<double>(s);
      sample(t, result.field);
    }
  }
  return result;
}

}  // namespace stargraph
