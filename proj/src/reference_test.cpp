#include <doctest.h>

#include <cmath>
#include <limits>

#include "stargraph/error.hpp"
#include "stargraph/reference.hpp"

using namespace stargraph;

namespace {

double line_l2(const LineField& a, const LineField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s * a.dx);
}

double line_sup(const LineField& a) {
  double s = 0.0;
  for (const auto& z : a.values) s = std::max(s, std::abs(z));
  return s;
}

LineField line_soliton(double dx, double half_width, const SolitonParams& s, double t) {
  LineField u = LineField::zeros(dx, half_width);
  for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = s.value(u.x(i), t);
  return u;
}

}  // namespace

TEST_CASE("soliton profile") {
  CHECK(sech_profile(0.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sech_profile(1.3) == doctest::Approx(sech_profile(-1.3)));
  const SolitonParams s{2.0, 5.0};
  CHECK(std::abs(s.value(2.0 + 5.0 * 0.7, 0.7)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // negative velocity moves left
  const SolitonParams l{2.0, -5.0};
  CHECK(std::abs(l.value(2.0 - 5.0 * 0.3, 0.3)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("soliton solves i u_t = -u_xx - |u|^2 u") {
  const SolitonParams s{0.5, 3.0};
  const double x = 0.9, t = 0.2, h = 1e-3;
  const cplx ut = (s.value(x, t + h) - s.value(x, t - h)) / (2.0 * h);
  const cplx uxx = (s.value(x + h, t) - 2.0 * s.value(x, t) + s.value(x - h, t)) / (h * h);
  const cplx u = s.value(x, t);
  CHECK(std::abs(cplx(0.0, 1.0) * ut + uxx + std::norm(u) * u) < 1e-5);
}

TEST_CASE("cutoff") {
  CHECK(cutoff_chi(-3.0) == 0.0);
  CHECK(cutoff_chi(1.0) == 0.0);
  CHECK(cutoff_chi(2.0) == 1.0);
  CHECK(cutoff_chi(7.0) == 1.0);
  CHECK(cutoff_chi(1.5) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    CHECK(cutoff_chi(x) >= prev);
    prev = cutoff_chi(x);
  }
}

TEST_CASE("initial datum") {
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  const double v = 8.0, delta = 0.4, x0 = minimal_x0(v, delta);
  CHECK(x0 == doctest::Approx(std::pow(8.0, 0.6)));
  CHECK_THROWS_AS(initial_datum(0.9 * x0, v, delta, g), Error);

  const GraphField f = initial_datum(x0, v, delta, g);
  CHECK(edge_mass(f, 1) == 0.0);
  CHECK(edge_mass(f, 2) == 0.0);
  for (std::size_t m = 0; m < g.n_points; ++m) {
    const double x = g.x(m);
    if (x <= 1.0) CHECK(f[0][m] == cplx{});
    if (x >= 2.0) CHECK(std::abs(f[0][m] - std::polar(sech_profile(x - x0), -0.5 * v * x)) < 1e-15);
  }
  const GraphField moved = initial_datum(x0, v, delta, g, 2);
  CHECK(l2_distance(GraphField{g, {moved[2], moved[0], moved[1]}}, f) == 0.0);
}

TEST_CASE("phase schedule") {
  const auto s = phase_schedule(4.0, 16.0, 0.5, 1.0);
  CHECK(s.t1 == doctest::Approx(0.0));
  CHECK(s.t2 == doctest::Approx(0.5));
  CHECK(s.t3 == doctest::Approx(0.5 + std::log(16.0)));
  CHECK_THROWS_AS(phase_schedule(4.0, 1.0, 0.5, 1.0), Error);
  CHECK_THROWS_AS(phase_schedule(4.0, 16.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(phase_schedule(4.0, 16.0, 0.5, 0.0), Error);
}

TEST_CASE("tail mass") {
  for (double v : {8.0, 16.0}) {
    const double y = std::pow(v, 0.6);
    const double closed = tail_mass_closed_form(y);
    CHECK(std::abs(closed - tail_mass_quadrature(y)) / closed < 1e-10);
  }
  CHECK(tail_mass_closed_form(0.0) == doctest::Approx(2.0));
}

TEST_CASE("phase-2 superposition") {
  const GridSpec g = GridSpec::from_length(40.0, 0.01);
  const double v = 8.0, delta = 0.4, x0 = minimal_x0(v, delta);
  const auto sched = phase_schedule(x0, v, delta, 0.5);
  const auto coeffs = rescaled_coefficients(CouplingKind::delta, 1.0, v);
  const auto s1 = phase2_superposition(x0, v, coeffs, sched.t1, g);
  // the outgoing waves sit at -v^{1-delta}: only their tails are on the graph
  const double tail = tail_mass_closed_form(std::pow(v, 1.0 - delta));
  CHECK(mass(s1.outgoing) == doctest::Approx(tail).epsilon(1e-4));
  CHECK(edge_mass(s1.outgoing, 1) == doctest::Approx(std::norm(coeffs.t) * tail).epsilon(1e-4));
  CHECK(edge_mass(s1.incoming, 1) == 0.0);
  // and the incoming one has lost the same tail across the vertex
  CHECK(mass(s1.incoming) == doctest::Approx(4.0 - tail).epsilon(1e-4));
  // symmetric at t2
  const auto s2 = phase2_superposition(x0, v, coeffs, sched.t2, g);
  CHECK(mass(s2.incoming) == doctest::Approx(tail).epsilon(1e-4));
  CHECK(mass(s2.outgoing) == doctest::Approx(4.0 - tail).epsilon(1e-4));
}

TEST_CASE("truth soliton continues onto edge 2") {
  const GridSpec g = GridSpec::from_length(40.0, 0.02);
  const GraphField a = truth_soliton(10.0, 4.0, 0.0, g);
  const GraphField b = truth_soliton(10.0, 4.0, 5.0, g);
  CHECK(edge_mass(a, 0) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(edge_mass(b, 1) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(edge_mass(b, 2) == 0.0);
}

TEST_CASE("line NLS") {
  const double dx = 0.05, hw = 40.0;
  const SolitonParams s{-5.0, 4.0};
  LineEvolveConfig c;
  c.dt = 1e-3;
  const LineField u0 = line_soliton(dx, hw, s, 0.0);
  CHECK(u0.mass() == doctest::Approx(4.0).epsilon(1e-10));
  const LineField u1 = free_line_nls_evolve(u0, 2.0, c);
  CHECK(line_l2(u1, line_soliton(dx, hw, s, 2.0)) < 1e-4);
  CHECK(u1.mass() == doctest::Approx(u0.mass()).epsilon(1e-12));

  // tiny data: the nonlinearity is invisible
  LineField small = u0;
  for (auto& z : small.values) z *= 1e-6;
  const LineField a = free_line_nls_evolve(small, 1.0, c);
  const LineField b = free_line_linear_evolve(small, 1.0);
  CHECK(line_l2(a, b) / std::sqrt(small.mass()) < 1e-10);

  // a third of a soliton is below the threshold for a bound state and spreads
  LineField third = line_soliton(dx, 2.0 * hw, SolitonParams{0.0, 0.0}, 0.0);
  for (auto& z : third.values) z /= 3.0;
  const LineField later = free_line_nls_evolve(third, 4.0, c);
  CHECK(line_sup(later) < 0.7 * line_sup(third));

  // a packet pushed into the rim trips the certificate
  LineField edge = line_soliton(dx, hw, SolitonParams{30.0, 20.0}, 0.0);
  CHECK_THROWS_AS(free_line_nls_evolve(edge, 2.0, c), TruncationViolation);
}

TEST_CASE("reference bundle") {
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  const double v = 8.0, delta = 0.4, x0 = minimal_x0(v, delta);
  const auto sched = phase_schedule(x0, v, delta, 0.5);
  const auto coeffs = rescaled_coefficients(CouplingKind::kirchhoff, 0.0, v);
  // the line box is widened to cover the edges
  CHECK(outgoing_profiles_at_t2(coeffs, sched, g, 20.0).phi_ref.half_width() > g.length());

  const auto b = outgoing_profiles_at_t2(coeffs, sched, g, 60.0);
  CHECK(b.time == sched.t2);
  CHECK(line_sup(b.phi_ref) == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-3));
  CHECK(line_sup(b.phi_tr) == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-3));
  CHECK(b.phi_ref.mass() + 2.0 * b.phi_tr.mass() == doctest::Approx(4.0).epsilon(1e-10));

  const auto f = b.fields(g);
  // Phi^1 lives on edges 1 and 2 only
  CHECK(edge_mass(f[0], 2) == 0.0);
  CHECK(edge_mass(f[1], 0) == 0.0);
  CHECK(edge_mass(f[2], 1) == 0.0);
  CHECK(l2_distance(b.sum(g), f[0] + f[1] + f[2]) == 0.0);

  LineEvolveConfig c;
  c.dt = 1e-3;
  const auto same = advance_reference(b, b.time, c);
  CHECK(line_l2(same.phi_ref, b.phi_ref) == 0.0);
  const auto later = advance_reference(b, b.time + 1.0, c);
  CHECK(later.time == doctest::Approx(b.time + 1.0));
  CHECK(later.phi_tr.mass() == doctest::Approx(b.phi_tr.mass()).epsilon(1e-12));
  CHECK_THROWS_AS(advance_reference(later, b.time, c), Error);
}

TEST_CASE("folding") {
  LineField u = LineField::zeros(0.1, 5.0);
  for (std::size_t i = 0; i < u.size(); ++i) u.values[i] = u.x(i);
  const GridSpec g = GridSpec::from_length(3.0, 0.1);
  const Samples plus = fold_line(u, g, 1);
  const Samples minus = fold_line(u, g, -1);
  CHECK(plus[10].real() == doctest::Approx(1.0));
  CHECK(minus[10].real() == doctest::Approx(-1.0));
  CHECK_THROWS_AS(fold_line(u, g, 0), Error);
  CHECK_THROWS_AS(fold_line(u, GridSpec::from_length(3.0, 0.05), 1), Error);
}
