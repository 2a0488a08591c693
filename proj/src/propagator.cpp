#include "stargraph/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stargraph/error.hpp"
#include "stargraph/fft.hpp"

namespace stargraph {

LineLayout LineLayout::for_grid(const GridSpec& grid, double padding) {
  grid.validate();
  require(padding >= 2.0, "line padding must be at least twice the edge length");
  const std::size_t cells = grid.n_points - 1;
  const auto wanted = static_cast<std::size_t>(std::ceil(padding * static_cast<double>(cells)));
  LineLayout layout;
  layout.dx = grid.dx;
  layout.edge_points = grid.n_points;
  layout.size = good_fft_size(std::max(wanted, 2 * grid.n_points));
  layout.wavenumbers.resize(layout.size);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(layout.size) * grid.dx);
  const auto n = static_cast<std::ptrdiff_t>(layout.size);
  for (std::ptrdiff_t i = 0; i < n; ++i) layout.wavenumbers[static_cast<std::size_t>(i)] = dk * static_cast<double>(i < (n + 1) / 2 ? i : i - n);
  return layout;
}

std::vector<cplx> free_multiplier(const LineLayout& layout, double t) {
  std::vector<cplx> m(layout.size);
  const double norm = 1.0 / static_cast<double>(layout.size);
  for (std::size_t i = 0; i < layout.size; ++i) {
    const double k = layout.wavenumbers[i];
    m[i] = std::polar(norm, -k * k * t);
  }
  return m;
}

void free_evolve(std::vector<cplx>& line, const std::vector<cplx>& multiplier) {
  const FftPlan& plan = FftPlan::get(line.size());
  plan.forward(line.data());
  for (std::size_t i = 0; i < line.size(); ++i) line[i] *= multiplier[i];
  plan.backward(line.data());
}

HalfLinePair apply_half_line_propagators(std::span<const cplx> psi, const GridSpec& grid, double t) {
  grid.validate();
  require(psi.size() == grid.n_points, "edge sample count does not match grid");
  const LineLayout layout = LineLayout::for_grid(grid);
  std::vector<cplx> line(layout.size, cplx{});
  line[0] = 0.5 * psi[0];
  for (std::size_t m = 1; m < psi.size(); ++m) line[m] = psi[m];
  if (t != 0.0) free_evolve(line, free_multiplier(layout, t));

  HalfLinePair out{Samples(psi.size()), Samples(psi.size())};
  for (std::size_t m = 0; m < psi.size(); ++m) {
    out.minus[m] = line[m];
    out.plus[m] = line[layout.index_of(-static_cast<std::ptrdiff_t>(m))];
  }
  return out;
}

cplx VertexReflection::sum_channel(double q, double dx) const {
  if (!robin) return cplx{};
  // -(a + iw)/(a - iw) at w = (2/dx) tan(q dx / 2), as a one-sided all-pass in z
  const double rho = pole(dx);
  const cplx z = std::polar(1.0, q * dx);
  return -(z - rho) / (1.0 - rho * z);
}

double VertexReflection::pole(double dx) const {
  double a = rate;
  if (matched_wavenumber > 0.0) {
    const double q = matched_wavenumber;
    require(q * dx < std::numbers::pi, "matched wavenumber must lie below the grid Nyquist");
    a *= 2.0 * std::tan(0.5 * q * dx) / (dx * q);
  }
  return (2.0 - a * dx) / (2.0 + a * dx);
}

VertexReflection reflection_for(const VertexCoupling& coupling) {
  coupling.validate();
  VertexReflection r;
  if (coupling.acts_as_kirchhoff()) {
    for (std::size_t j = 0; j < kEdges; ++j)
      for (std::size_t k = 0; k < kEdges; ++k) r.matrix[j][k] = (j == k ? -1.0 : 0.0) + 2.0 / 3.0;
    return r;
  }
  // differences: Dirichlet for delta, Neumann for delta-prime
  const double diff = coupling.kind == CouplingKind::delta ? -1.0 : 1.0;
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t k = 0; k < kEdges; ++k) r.matrix[j][k] = diff * ((j == k ? 1.0 : 0.0) - 1.0 / 3.0);
  r.robin = true;
  r.rate = coupling.kind == CouplingKind::delta ? coupling.strength / 3.0 : 3.0 / coupling.strength;
  return r;
}

VertexReflection reflection_for_two_edge(int j) {
  require(j >= 1 && j <= 3, "two-edge Hamiltonian index must be 1, 2 or 3");
  const auto a = static_cast<std::size_t>(j - 1);
  const std::size_t b = (a + 1) % kEdges;
  const std::size_t c = (a + 2) % kEdges;
  VertexReflection r;
  r.matrix[a][b] = 1.0;
  r.matrix[b][a] = 1.0;
  r.matrix[c][c] = -1.0;
  return r;
}

GraphPropagator::GraphPropagator(const GridSpec& grid, const VertexReflection& reflection, double t, double padding)
    : grid_(grid), reflection_(reflection), t_(t), layout_(LineLayout::for_grid(grid, padding)) {
  require(std::isfinite(t), "propagation time must be finite");
  multiplier_ = free_multiplier(layout_, t);
  if (reflection_.robin) {
    require(reflection_.rate >= 0.0 && std::isfinite(reflection_.rate), "Robin rate must be non-negative");
    robin_.resize(layout_.size);
    for (std::size_t i = 0; i < layout_.size; ++i) robin_[i] = reflection_.sum_channel(layout_.wavenumbers[i], grid.dx);
  }
  for (auto& line : lines_) line.assign(layout_.size, cplx{});
  for (auto& line : out_) line.assign(layout_.size, cplx{});
}

void GraphPropagator::extend(const GraphField& field) const {
  const std::size_t size = layout_.size;
  const auto& A = reflection_.matrix;
  const FftPlan& plan = FftPlan::get(size);

  // Zero extension. The vertex sample is split so that the image puts the
  // rest of it back: half per edge, except 1/(1 + rho) for the Robin sum
  // channel, whose image starts with rho times the mirrored sample.
  const cplx vertex_sum = field[0][0] + field[1][0] + field[2][0];
  const double robin_extra = robin_.empty() ? 0.0 : 1.0 / (1.0 + reflection_.pole(grid_.dx)) - 0.5;
  for (std::size_t j = 0; j < kEdges; ++j) {
    auto& line = lines_[j];
    std::fill(line.begin(), line.end(), cplx{});
    line[0] = 0.5 * field[j][0] + robin_extra * vertex_sum / 3.0;
    std::copy(field[j].begin() + 1, field[j].end(), line.begin() + 1);
    plan.forward(line.data());
  }
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t mirror = i == 0 ? 0 : size - i;
    const cplx f0 = lines_[0][mirror], f1 = lines_[1][mirror], f2 = lines_[2][mirror];
    const cplx s = robin_.empty() ? cplx{} : robin_[i] * (f0 + f1 + f2) / 3.0;
    for (std::size_t j = 0; j < kEdges; ++j) out_[j][i] = lines_[j][i] + A[j][0] * f0 + A[j][1] * f1 + A[j][2] * f2 + s;
  }
}

void GraphPropagator::apply(GraphField& field) const {
  field.validate();
  require(field.grid == grid_, "field grid does not match the propagator");
  if (t_ == 0.0) return;
  extend(field);
  const FftPlan& plan = FftPlan::get(layout_.size);
  for (std::size_t j = 0; j < kEdges; ++j) {
    for (std::size_t i = 0; i < layout_.size; ++i) out_[j][i] *= multiplier_[i];
    plan.backward(out_[j].data());
    std::copy_n(out_[j].begin(), grid_.n_points, field[j].begin());
  }
}

std::array<Samples, kEdges> GraphPropagator::derivative(const GraphField& field) const {
  field.validate();
  require(field.grid == grid_, "field grid does not match the propagator");
  extend(field);
  const std::size_t size = layout_.size;
  const FftPlan& plan = FftPlan::get(size);
  const double norm = 1.0 / static_cast<double>(size);
  std::array<Samples, kEdges> out;
  for (std::size_t j = 0; j < kEdges; ++j) {
    for (std::size_t i = 0; i < size; ++i) {
      // the Nyquist mode has no odd part
      const bool nyquist = size % 2 == 0 && i == size / 2;
      out_[j][i] *= nyquist ? cplx{} : cplx{0.0, layout_.wavenumbers[i] * norm};
    }
    plan.backward(out_[j].data());
    out[j].assign(out_[j].begin(), out_[j].begin() + static_cast<std::ptrdiff_t>(grid_.n_points));
  }
  return out;
}

GraphField apply_linear_propagator(const VertexCoupling& coupling, double t, const GraphField& psi) {
  GraphField out = psi;
  if (t == 0.0) return out;
  GraphPropagator(psi.grid, reflection_for(coupling), t).apply(out);
  return out;
}

GraphField apply_two_edge_propagator(int j, double t, const GraphField& psi) {
  const VertexReflection r = reflection_for_two_edge(j);
  GraphField out = psi;
  if (t == 0.0) return out;
  GraphPropagator(psi.grid, r, t).apply(out);
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  require(den > 0.0, "log-log fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

DecayProbe dispersive_decay_probe(const VertexCoupling& coupling, const GraphField& psi0,
                                  std::span<const double> times) {
  psi0.validate();
  DecayProbe probe;
  const VertexReflection r = reflection_for(coupling);
  double prev = 0.0;
  for (double t : times) {
    require(t > prev, "probe times must be positive and increasing");
    prev = t;
    GraphField f = psi0;
    GraphPropagator(psi0.grid, r, t).apply(f);
    probe.times.push_back(t);
    probe.sup_norms.push_back(lp_norm(f, std::numeric_limits<double>::infinity()));
  }
  if (probe.times.size() >= 2) probe.slope = loglog_slope(probe.times, probe.sup_norms);
  return probe;
}

}  // namespace stargraph
