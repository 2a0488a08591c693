#include "stargraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "stargraph/error.hpp"
#include "stargraph/propagator.hpp"

namespace stargraph {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::numeric_failure: return "numeric-failure";
    case ErrorCode::domain_truncation_violation: return "domain-truncation-violation";
    case ErrorCode::checkpoint_version_mismatch: return "checkpoint-version-mismatch";
    case ErrorCode::checkpoint_corrupt_header: return "checkpoint-corrupt-header";
    case ErrorCode::checkpoint_shape_mismatch: return "checkpoint-shape-mismatch";
    case ErrorCode::io_failure: return "io-failure";
  }
  return "unknown";
}

namespace {

std::string truncation_message(double time, double far_mass, double threshold) {
  std::ostringstream o;
  o << "far-end mass " << far_mass << " exceeds " << threshold << " at t = " << time;
  return o.str();
}

}  // namespace

TruncationViolation::TruncationViolation(double time, double far_mass, double threshold)
    : Error(ErrorCode::domain_truncation_violation, truncation_message(time, far_mass, threshold)),
      time_(time),
      far_mass_(far_mass) {}

void GridSpec::validate() const {
  require(dx > 0.0 && std::isfinite(dx), "grid spacing must be positive");
  require(n_points >= 16, "grid needs at least 16 points per edge");
}

GridSpec GridSpec::from_length(double length, double dx) {
  require(length > 0.0 && dx > 0.0, "edge length and dx must be positive");
  const auto cells = static_cast<std::size_t>(std::ceil(length / dx - 1e-9));
  GridSpec g{dx, cells + 1};
  g.validate();
  return g;
}

GraphField GraphField::zeros(const GridSpec& grid) {
  grid.validate();
  GraphField f{grid, {}};
  for (auto& e : f.edges) e.assign(grid.n_points, cplx{});
  return f;
}

void GraphField::validate() const {
  grid.validate();
  for (const auto& e : edges) require(e.size() == grid.n_points, "edge sample count does not match grid");
}

GraphField& GraphField::operator+=(const GraphField& other) {
  require(grid == other.grid, "grid mismatch");
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < grid.n_points; ++m) edges[j][m] += other.edges[j][m];
  return *this;
}

GraphField& GraphField::operator-=(const GraphField& other) {
  require(grid == other.grid, "grid mismatch");
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < grid.n_points; ++m) edges[j][m] -= other.edges[j][m];
  return *this;
}

GraphField& GraphField::operator*=(cplx c) {
  for (auto& e : edges)
    for (auto& z : e) z *= c;
  return *this;
}

GraphField operator+(GraphField a, const GraphField& b) { return a += b; }
GraphField operator-(GraphField a, const GraphField& b) { return a -= b; }
GraphField operator*(cplx c, GraphField a) { return a *= c; }

const char* to_string(CouplingKind kind) noexcept {
  switch (kind) {
    case CouplingKind::kirchhoff: return "kirchhoff";
    case CouplingKind::delta: return "delta";
    case CouplingKind::delta_prime: return "deltaprime";
  }
  return "unknown";
}

CouplingKind parse_coupling_kind(const std::string& name) {
  if (name == "kirchhoff" || name == "K") return CouplingKind::kirchhoff;
  if (name == "delta" || name == "D") return CouplingKind::delta;
  if (name == "deltaprime" || name == "delta_prime" || name == "delta-prime" || name == "P")
    return CouplingKind::delta_prime;
  fail(ErrorCode::invalid_parameter, "unknown coupling '" + name + "'");
}

void VertexCoupling::validate() const {
  switch (kind) {
    case CouplingKind::kirchhoff: break;
    case CouplingKind::delta:
      require(strength >= 0.0 && std::isfinite(strength), "delta coupling needs alpha >= 0");
      break;
    case CouplingKind::delta_prime:
      require(strength > 0.0 && std::isfinite(strength), "delta-prime coupling needs beta > 0");
      break;
  }
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.empty()) return 0.0;
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t m = 1; m + 1 < values.size(); ++m) sum += values[m];
  return sum * dx;
}

namespace {

double edge_sum_pow(const Samples& psi, double dx, double p) {
  const std::size_t n = psi.size();
  double sum = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double w = (m == 0 || m + 1 == n) ? 0.5 : 1.0;
    const double a = std::abs(psi[m]);
    sum += w * (p == 2.0 ? a * a : std::pow(a, p));
  }
  return sum * dx;
}

}  // namespace

double lp_norm(const GraphField& field, double p) {
  require(p >= 1.0, "lp_norm needs p >= 1");
  field.validate();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (const auto& e : field.edges)
      for (const auto& z : e) mx = std::max(mx, std::abs(z));
    return mx;
  }
  double total = 0.0;
  for (const auto& e : field.edges) total += edge_sum_pow(e, field.grid.dx, p);
  return std::pow(total, 1.0 / p);
}

double edge_mass(const GraphField& field, std::size_t j) {
  require(j < kEdges, "edge index out of range");
  return edge_sum_pow(field.edges[j], field.grid.dx, 2.0);
}

double mass(const GraphField& field) {
  double total = 0.0;
  for (std::size_t j = 0; j < kEdges; ++j) total += edge_mass(field, j);
  return total;
}

double l2_distance(const GraphField& a, const GraphField& b) {
  require(a.grid == b.grid, "grid mismatch");
  const std::size_t n = a.grid.n_points;
  double total = 0.0;
  for (std::size_t j = 0; j < kEdges; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      const double w = (m == 0 || m + 1 == n) ? 0.5 : 1.0;
      total += w * std::norm(a.edges[j][m] - b.edges[j][m]);
    }
  }
  return std::sqrt(total * a.grid.dx);
}

double far_end_mass(const GraphField& field, double fraction) {
  require(fraction > 0.0 && fraction < 1.0, "far-end fraction must lie in (0, 1)");
  const std::size_t n = field.grid.n_points;
  const auto first = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(n - 1)));
  double total = 0.0;
  for (const auto& e : field.edges) {
    for (std::size_t m = first; m < n; ++m) {
      const double w = (m == first || m + 1 == n) ? 0.5 : 1.0;
      total += w * std::norm(e[m]);
    }
  }
  return total * field.grid.dx;
}

Samples edge_derivative(std::span<const cplx> psi, double dx) {
  const std::size_t n = psi.size();
  Samples d(n);
  if (n < 5) return d;
  const double h2 = 2.0 * dx;
  const double h12 = 12.0 * dx;
  d[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / h2;
  d[1] = (psi[2] - psi[0]) / h2;
  for (std::size_t m = 2; m + 2 < n; ++m)
    d[m] = (psi[m - 2] - 8.0 * psi[m - 1] + 8.0 * psi[m + 1] - psi[m + 2]) / h12;
  d[n - 2] = (psi[n - 1] - psi[n - 3]) / h2;
  d[n - 1] = (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / h2;
  return d;
}

double linear_energy(const GraphField& field, const VertexCoupling& coupling,
                     const std::array<Samples, kEdges>& derivative) {
  field.validate();
  coupling.validate();
  double kinetic = 0.0;
  std::vector<double> dens(field.grid.n_points);
  for (const auto& d : derivative) {
    require(d.size() == field.grid.n_points, "derivative samples do not match the grid");
    for (std::size_t m = 0; m < d.size(); ++m) dens[m] = std::norm(d[m]);
    kinetic += trapezoid(dens, field.grid.dx);
  }
  if (coupling.acts_as_kirchhoff()) return kinetic;
  if (coupling.kind == CouplingKind::delta) return kinetic + coupling.strength * std::norm(field.edges[0][0]);
  cplx sum{};
  for (const auto& e : field.edges) sum += e[0];
  return kinetic + std::norm(sum) / coupling.strength;
}

double linear_energy(const GraphField& field, const VertexCoupling& coupling, DerivativeRule rule) {
  field.validate();
  coupling.validate();
  if (rule == DerivativeRule::spectral)
    return linear_energy(field, coupling, GraphPropagator(field.grid, reflection_for(coupling), 0.0).derivative(field));
  std::array<Samples, kEdges> d;
  for (std::size_t j = 0; j < kEdges; ++j) d[j] = edge_derivative(field.edges[j], field.grid.dx);
  return linear_energy(field, coupling, d);
}

double energy(const GraphField& field, const VertexCoupling& coupling, DerivativeRule rule) {
  const double quartic = std::pow(lp_norm(field, 4.0), 4.0);
  return 0.5 * linear_energy(field, coupling, rule) - 0.25 * quartic;
}

double BoundaryResidual::max() const { return std::max({match_12, match_23, balance}); }

cplx vertex_value(const GraphField& field, std::size_t j) { return field.edges.at(j).at(0); }

cplx vertex_derivative(const GraphField& field, std::size_t j) {
  const auto& e = field.edges.at(j);
  return (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * field.grid.dx);
}

BoundaryResidual boundary_residual(const GraphField& field, const VertexCoupling& coupling) {
  field.validate();
  coupling.validate();
  std::array<cplx, kEdges> value{}, slope{};
  for (std::size_t j = 0; j < kEdges; ++j) {
    value[j] = vertex_value(field, j);
    slope[j] = vertex_derivative(field, j);
  }
  BoundaryResidual r;
  if (coupling.kind == CouplingKind::delta_prime) {
    r.match_12 = std::abs(slope[0] - slope[1]);
    r.match_23 = std::abs(slope[1] - slope[2]);
    r.balance = std::abs(value[0] + value[1] + value[2] - coupling.strength * slope[0]);
    return r;
  }
  const double alpha = coupling.acts_as_kirchhoff() ? 0.0 : coupling.strength;
  r.match_12 = std::abs(value[0] - value[1]);
  r.match_23 = std::abs(value[1] - value[2]);
  r.balance = std::abs(slope[0] + slope[1] + slope[2] - alpha * value[0]);
  return r;
}

}  // namespace stargraph
