#include "stargraph/reference.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "stargraph/error.hpp"
#include "stargraph/fft.hpp"

namespace stargraph {

double sech_profile(double y) {
  const double a = std::abs(y);
  if (a > 700.0) return 0.0;
  const double e = std::exp(-a);
  return std::numbers::sqrt2 * 2.0 * e / (1.0 + e * e);
}

cplx SolitonParams::value(double x, double t) const {
  const double phase = 0.5 * v * x - 0.25 * v * v * t + t;
  return std::polar(sech_profile(x - x0 - v * t), phase);
}

Samples SolitonParams::sample(std::span<const double> xs, double t) const {
  Samples out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = value(xs[i], t);
  return out;
}

double cutoff_chi(double x) {
  const auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (x <= 1.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double a = g(x - 1.0);
  const double b = g(2.0 - x);
  return a / (a + b);
}

double minimal_x0(double v, double delta) {
  require(v > 0.0 && std::isfinite(v), "velocity must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return std::pow(v, 1.0 - delta);
}

namespace {

void require_edge(std::size_t e) { require(e < kEdges, "incoming edge must be 0, 1 or 2"); }

}  // namespace

GraphField initial_datum(double x0, double v, double delta, const GridSpec& grid, std::size_t incoming_edge) {
  require_edge(incoming_edge);
  const double lo = minimal_x0(v, delta);
  // tolerate rounding in a caller that passes exactly v^{1-delta}
  require(x0 >= lo * (1.0 - 1e-12), "initial datum needs x0 >= v^{1-delta}");
  GraphField f = GraphField::zeros(grid);
  auto& e = f[incoming_edge];
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    const double x = grid.x(m);
    const double chi = cutoff_chi(x);
    e[m] = chi == 0.0 ? cplx{} : chi * std::polar(sech_profile(x - x0), -0.5 * v * x);
  }
  return f;
}

PhaseSchedule phase_schedule(double x0, double v, double delta, double T) {
  require(v > 1.0 && std::isfinite(v), "phase schedule needs v > 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(T > 0.0 && std::isfinite(T), "T must be positive");
  PhaseSchedule s{x0, v, delta, T};
  s.t1 = x0 / v - std::pow(v, -delta);
  s.t2 = x0 / v + std::pow(v, -delta);
  s.t3 = s.t2 + T * std::log(v);
  return s;
}

GraphField truth_soliton(double x0, double v, double t, const GridSpec& grid, std::size_t incoming_edge) {
  require_edge(incoming_edge);
  GraphField f = GraphField::zeros(grid);
  const double common = -0.25 * v * v * t + t;
  auto& in = f[incoming_edge];
  auto& out = f[(incoming_edge + 1) % kEdges];
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    const double x = grid.x(m);
    in[m] = std::polar(sech_profile(x - x0 + v * t), common - 0.5 * v * x);
    out[m] = std::polar(sech_profile(x + x0 - v * t), common + 0.5 * v * x);
  }
  return f;
}

Superposition phase2_superposition(double x0, double v, const RescaledCoefficients& coeffs, double t,
                                   const GridSpec& grid, std::size_t incoming_edge) {
  require_edge(incoming_edge);
  Superposition s{GraphField::zeros(grid), GraphField::zeros(grid)};
  const SolitonParams in{x0, -v};
  const SolitonParams out{-x0, v};
  for (std::size_t m = 0; m < grid.n_points; ++m) {
    const double x = grid.x(m);
    s.incoming[incoming_edge][m] = in.value(x, t);
    const cplx o = out.value(x, t);
    for (std::size_t j = 0; j < kEdges; ++j) s.outgoing[j][m] = (j == incoming_edge ? coeffs.r : coeffs.t) * o;
  }
  return s;
}

double tail_mass_closed_form(double y) {
  const double e = std::exp(-2.0 * y);
  return 4.0 * e / (1.0 + e);
}

double tail_mass_quadrature(double y) {
  // 2 sech^2(s) written with e^{-2s} so it stays finite for large s
  const auto f = [](double u) {
    const double e = std::exp(-2.0 * std::abs(u));
    return 8.0 * e / ((1.0 + e) * (1.0 + e));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double value = integrator.integrate([&](double s) { return f(y + s); }, 0.0,
                                            std::numeric_limits<double>::infinity(), 1e-15, &err);
  if (!std::isfinite(value) || err > 1e-12 * std::max(value, 1e-300) + 1e-300)
    fail(ErrorCode::numeric_failure, "tail-mass quadrature did not converge");
  return value;
}

// ---------------------------------------------------------------------------

LineField LineField::zeros(double dx, double half_width) {
  require(dx > 0.0 && half_width > 16.0 * dx, "line box needs dx > 0 and at least 16 cells per side");
  auto half = static_cast<std::size_t>(std::ceil(half_width / dx - 1e-9));
  std::size_t n = good_fft_size(2 * half);
  while (n % 2 != 0) n = good_fft_size(n + 1);
  LineField f;
  f.dx = dx;
  f.origin = n / 2;
  f.values.assign(n, cplx{});
  return f;
}

double LineField::mass() const {
  double s = 0.0;
  for (const auto& z : values) s += std::norm(z);
  return s * dx;
}

double LineField::rim_mass(double fraction) const {
  require(fraction > 0.0 && fraction < 1.0, "rim fraction must lie in (0, 1)");
  const std::size_t n = size();
  const auto band = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(origin)));
  double s = 0.0;
  for (std::size_t i = 0; i < band && i < n; ++i) s += std::norm(values[i]) + std::norm(values[n - 1 - i]);
  return s * dx;
}

namespace {

std::vector<cplx> line_multiplier(std::size_t n, double dx, double t) {
  std::vector<cplx> m(n);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  const auto nn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const double k = dk * static_cast<double>(i < (nn + 1) / 2 ? i : i - nn);
    m[static_cast<std::size_t>(i)] = std::polar(1.0 / static_cast<double>(n), -k * k * t);
  }
  return m;
}

void apply_multiplier(Samples& u, const std::vector<cplx>& mult) {
  const FftPlan& plan = FftPlan::get(u.size());
  plan.forward(u.data());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= mult[i];
  plan.backward(u.data());
}

void line_phase(Samples& u, double dt) {
  for (auto& z : u) z *= std::polar(1.0, std::norm(z) * dt);
}

}  // namespace

LineField free_line_linear_evolve(const LineField& u0, double t) {
  LineField u = u0;
  if (t != 0.0) apply_multiplier(u.values, line_multiplier(u.size(), u.dx, t));
  return u;
}

LineField free_line_nls_evolve(const LineField& u0, double t_span, const LineEvolveConfig& config) {
  require(config.dt > 0.0 && t_span >= 0.0, "line evolution needs dt > 0 and a non-negative span");
  require(config.check_interval >= 1, "check interval must be at least one step");
  LineField u = u0;
  auto check = [&](double t) {
    const double rim = u.rim_mass(config.rim_fraction);
    if (rim > config.rim_mass_threshold) throw TruncationViolation(t, rim, config.rim_mass_threshold);
  };
  check(0.0);
  if (t_span == 0.0) return u;
  const auto steps = static_cast<std::size_t>(std::ceil(t_span / config.dt - 1e-9));
  const double dt = t_span / static_cast<double>(steps);
  const auto mult = line_multiplier(u.size(), u.dx, dt);
  for (std::size_t s = 1; s <= steps; ++s) {
    line_phase(u.values, 0.5 * dt);
    apply_multiplier(u.values, mult);
    line_phase(u.values, 0.5 * dt);
    if (s % config.check_interval == 0 || s == steps) check(dt * static_cast<double>(s));
  }
  return u;
}

// ---------------------------------------------------------------------------

Samples fold_line(const LineField& line, const GridSpec& grid, int sign) {
  require(sign == 1 || sign == -1, "fold sign must be +1 or -1");
  require(std::abs(line.dx - grid.dx) <= 1e-14 * grid.dx, "line and graph spacing differ");
  require(grid.n_points <= line.origin, "line box is shorter than the edge");
  Samples out(grid.n_points);
  for (std::size_t m = 0; m < grid.n_points; ++m) out[m] = line.values[sign > 0 ? line.origin + m : line.origin - m];
  return out;
}

std::array<GraphField, 3> ReferenceBundle::fields(const GridSpec& grid) const {
  const double t2 = schedule.t2;
  const cplx phase = std::polar(1.0, -0.25 * schedule.v * schedule.v * t2 + t2);
  const std::size_t a = incoming_edge;
  const std::size_t b = (a + 1) % kEdges;
  const std::size_t c = (a + 2) % kEdges;
  std::array<GraphField, 3> out{GraphField::zeros(grid), GraphField::zeros(grid), GraphField::zeros(grid)};
  const auto put = [&](GraphField& f, std::size_t plus_edge, std::size_t minus_edge, const LineField& line) {
    f[plus_edge] = fold_line(line, grid, 1);
    f[minus_edge] = fold_line(line, grid, -1);
    for (auto& z : f[plus_edge]) z *= phase;
    for (auto& z : f[minus_edge]) z *= phase;
  };
  put(out[0], a, b, phi_ref);
  put(out[1], b, c, phi_tr);
  put(out[2], c, a, phi_tr);
  return out;
}

GraphField ReferenceBundle::sum(const GridSpec& grid) const {
  auto f = fields(grid);
  return f[0] + f[1] + f[2];
}

ReferenceBundle outgoing_profiles_at_t2(const RescaledCoefficients& coeffs, const PhaseSchedule& schedule,
                                        const GridSpec& grid, double half_width, std::size_t incoming_edge) {
  require_edge(incoming_edge);
  ReferenceBundle b;
  b.schedule = schedule;
  b.coeffs = coeffs;
  b.time = schedule.t2;
  b.incoming_edge = incoming_edge;
  b.phi_ref = LineField::zeros(grid.dx, std::max(half_width, grid.length() + 2.0 * grid.dx));
  b.phi_tr = b.phi_ref;
  const double center = std::pow(schedule.v, 1.0 - schedule.delta);
  for (std::size_t i = 0; i < b.phi_ref.size(); ++i) {
    const double y = b.phi_ref.x(i);
    const cplx base = std::polar(sech_profile(y - center), 0.5 * schedule.v * y);
    b.phi_ref.values[i] = coeffs.r * base;
    b.phi_tr.values[i] = coeffs.t * base;
  }
  return b;
}

ReferenceBundle advance_reference(const ReferenceBundle& bundle, double t, const LineEvolveConfig& config) {
  require(t >= bundle.time, "reference can only be advanced forward");
  ReferenceBundle out = bundle;
  const double span = t - bundle.time;
  try {
    out.phi_ref = free_line_nls_evolve(bundle.phi_ref, span, config);
    out.phi_tr = free_line_nls_evolve(bundle.phi_tr, span, config);
  } catch (const TruncationViolation& e) {
    throw TruncationViolation(bundle.time + e.time(), e.far_mass(), config.rim_mass_threshold);
  }
  out.time = t;
  return out;
}

}  // namespace stargraph
