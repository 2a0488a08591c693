#include <doctest.h>

#include <cmath>
#include <limits>

#include "stargraph/error.hpp"
#include "stargraph/propagator.hpp"

using namespace stargraph;

namespace {

Samples packet(const GridSpec& g, double centre, double width, double carrier) {
  Samples s(g.n_points);
  for (std::size_t m = 0; m < g.n_points; ++m) {
    const double y = (g.x(m) - centre) / width;
    s[m] = std::polar(std::exp(-0.5 * y * y), carrier * g.x(m));
  }
  return s;
}

GraphField packet_field(const GridSpec& g, std::size_t edge = 0, double centre = 8.0, double carrier = -3.0) {
  GraphField f = GraphField::zeros(g);
  f[edge] = packet(g, centre, 1.0, carrier);
  return f;
}

std::vector<VertexCoupling> couplings() {
  return {VertexCoupling::kirchhoff(), VertexCoupling::delta(1.0), VertexCoupling::delta(10.0),
          VertexCoupling::delta_prime(1.0), VertexCoupling::delta_prime(0.1)};
}

double sq(double x) { return x * x; }

}  // namespace

TEST_CASE("half-line propagators: packet far from the vertex") {
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  const Samples psi = packet(g, 15.0, 1.0, 0.0);
  const auto out = apply_half_line_propagators(psi, g, 0.5);
  // free spreading of a unit Gaussian: |u|^2 peak falls to 1/sqrt(1 + (2t)^2)
  double peak = 0.0, plus = 0.0;
  for (std::size_t m = 0; m < g.n_points; ++m) {
    peak = std::max(peak, std::norm(out.minus[m]));
    plus = std::max(plus, std::abs(out.plus[m]));
  }
  CHECK(peak == doctest::Approx(1.0 / std::sqrt(1.0 + sq(2.0 * 0.5))).epsilon(1e-10));
  CHECK(plus < 1e-12);
}

TEST_CASE("half-line propagators are linear and split the line mass") {
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  const Samples a = packet(g, 7.0, 1.0, -2.0);
  const Samples b = packet(g, 12.0, 0.7, 1.0);
  const cplx ca{0.3, -1.0}, cb{2.0, 0.5};
  Samples mix(g.n_points);
  for (std::size_t m = 0; m < g.n_points; ++m) mix[m] = ca * a[m] + cb * b[m];
  const auto oa = apply_half_line_propagators(a, g, 1.0);
  const auto ob = apply_half_line_propagators(b, g, 1.0);
  const auto om = apply_half_line_propagators(mix, g, 1.0);
  double err = 0.0;
  for (std::size_t m = 0; m < g.n_points; ++m) {
    err = std::max(err, std::abs(om.minus[m] - ca * oa.minus[m] - cb * ob.minus[m]));
    err = std::max(err, std::abs(om.plus[m] - ca * oa.plus[m] - cb * ob.plus[m]));
  }
  CHECK(err < 1e-12);

  // what stays on x > 0 plus what leaked to x < 0 is the initial mass
  double before = 0.0, after = 0.0;
  for (std::size_t m = 1; m < g.n_points; ++m) {
    before += std::norm(a[m]);
    after += std::norm(oa.minus[m]) + std::norm(oa.plus[m]);
  }
  after += std::norm(oa.minus[0]);
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("zero time is the identity") {
  const GridSpec g = GridSpec::from_length(20.0, 0.05);
  const GraphField f = packet_field(g);
  for (const auto& c : couplings()) {
    const GraphField out = apply_linear_propagator(c, 0.0, f);
    CHECK(l2_distance(out, f) == 0.0);
  }
}

TEST_CASE("delta(0) propagates exactly like kirchhoff") {
  const GridSpec g = GridSpec::from_length(20.0, 0.05);
  const GraphField f = packet_field(g, 1, 5.0, 4.0);
  const GraphField a = apply_linear_propagator(VertexCoupling::kirchhoff(), 1.3, f);
  const GraphField b = apply_linear_propagator(VertexCoupling::delta(0.0), 1.3, f);
  CHECK(l2_distance(a, b) == 0.0);
}

TEST_CASE("group properties for every coupling") {
  const GridSpec g = GridSpec::from_length(40.0, 0.04);
  GraphField f = GraphField::zeros(g);
  f[0] = packet(g, 10.0, 1.5, -4.0);
  const double m0 = mass(f);
  for (const auto& c : couplings()) {
    CAPTURE(to_string(c.kind));
    CAPTURE(c.strength);
    // t = 3: the packet has cleared the vertex, where the Robin couplings
    // carry weight the plain trapezoid mass does not see
    const GraphField full = apply_linear_propagator(c, 3.0, f);
    const GraphField half = apply_linear_propagator(c, 1.5, apply_linear_propagator(c, 1.5, f));
    CHECK(l2_distance(full, half) < 1e-8);
    CHECK(l2_distance(apply_linear_propagator(c, -3.0, full), f) < 1e-8);
    CHECK(std::abs(mass(full) - m0) / m0 < 1e-8);
  }
}

TEST_CASE("propagated fields satisfy the vertex conditions at second order") {
  for (const auto& c : {VertexCoupling::kirchhoff(), VertexCoupling::delta(1.0), VertexCoupling::delta_prime(1.0)}) {
    CAPTURE(to_string(c.kind));
    double prev = 0.0;
    for (double dx : {0.04, 0.02}) {
      const GridSpec g = GridSpec::from_length(25.0, dx);
      GraphField f = GraphField::zeros(g);
      f[0] = packet(g, 8.0, 1.0, -2.0);
      const double r = boundary_residual(apply_linear_propagator(c, 4.0, f), c).max();
      CHECK(r < 10.0 * dx * dx);
      if (prev > 0.0) CHECK(prev / r > 3.0);
      prev = r;
    }
  }
}

TEST_CASE("two-edge propagators") {
  const GridSpec g = GridSpec::from_length(40.0, 0.05);
  CHECK_THROWS_AS(apply_two_edge_propagator(0, 1.0, GraphField::zeros(g)), Error);
  CHECK_THROWS_AS(apply_two_edge_propagator(4, 1.0, GraphField::zeros(g)), Error);

  // H_1 leaves edge 3 with the odd (Dirichlet) image: U^- - U^+
  GraphField f = GraphField::zeros(g);
  f[2] = packet(g, 7.0, 1.0, 2.0);
  const GraphField out = apply_two_edge_propagator(1, 0.8, f);
  const auto hl = apply_half_line_propagators(f[2], g, 0.8);
  double err = 0.0;
  for (std::size_t m = 1; m < g.n_points; ++m) err = std::max(err, std::abs(out[2][m] - (hl.minus[m] - hl.plus[m])));
  CHECK(err < 1e-12);
  CHECK(std::abs(out[2][0]) < 1e-12);
  CHECK(lp_norm(out, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-10));

  // a packet far out on edge 1 does not reach edge 2 in a short time
  const GraphField far = packet_field(g, 0, 12.0, 0.0);
  const GraphField moved = apply_two_edge_propagator(1, 0.3, far);
  CHECK(std::sqrt(edge_mass(moved, 1)) < 1e-12);
  for (int j = 1; j <= 3; ++j) {
    const GraphField m = apply_two_edge_propagator(j, 2.0, packet_field(g, static_cast<std::size_t>(j - 1), 8.0, -3.0));
    CHECK(mass(m) == doctest::Approx(mass(packet_field(g, 0, 8.0, -3.0))).epsilon(1e-8));
  }
}

TEST_CASE("two-edge H_1 is the line") {
  // a packet moving left on edge 1 comes out on edge 2 as if the vertex were absent
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  GraphField f = GraphField::zeros(g);
  f[0] = packet(g, 6.0, 1.0, -3.0);
  const GraphField out = apply_two_edge_propagator(1, 2.0, f);
  // the packet centre moves by 2 k t = 12
  double peak = 0.0;
  std::size_t where = 0;
  for (std::size_t m = 0; m < g.n_points; ++m)
    if (std::abs(out[1][m]) > peak) {
      peak = std::abs(out[1][m]);
      where = m;
    }
  CHECK(g.x(where) == doctest::Approx(6.0).epsilon(0.02));
  CHECK(mass(out) == doctest::Approx(mass(f)).epsilon(1e-10));
}

TEST_CASE("reflection symbols") {
  const VertexReflection k = reflection_for(VertexCoupling::kirchhoff());
  CHECK_FALSE(k.robin);
  CHECK(k.matrix[0][0] == doctest::Approx(-1.0 / 3.0));
  CHECK(k.matrix[0][1] == doctest::Approx(2.0 / 3.0));
  VertexReflection d = reflection_for(VertexCoupling::delta(3.0));
  CHECK(d.robin);
  CHECK(d.rate == doctest::Approx(1.0));
  // all-pass: |R| = 1 and R(q) R(-q) = 1
  for (double q : {0.0, 0.5, 3.0, 20.0}) {
    CHECK(std::abs(d.sum_channel(q, 0.05)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(d.sum_channel(q, 0.05) * d.sum_channel(-q, 0.05) - 1.0) < 1e-14);
  }
  // exact where matched
  d.matched_wavenumber = 4.0;
  const cplx exact = -cplx(1.0, 4.0) / cplx(1.0, -4.0);
  CHECK(std::abs(d.sum_channel(4.0, 0.05) - exact) < 1e-13);
}

TEST_CASE("dispersive probe") {
  const GridSpec g = GridSpec::from_length(60.0, 0.05);
  GraphField f = GraphField::zeros(g);
  f[0] = packet(g, 2.0, 0.5, 0.0);
  const std::vector<double> times{1.0, 2.0, 4.0};
  const auto a = dispersive_decay_probe(VertexCoupling::kirchhoff(), f, times);
  const auto b = dispersive_decay_probe(VertexCoupling::kirchhoff(), 2.0 * f, times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(b.sup_norms[i] == doctest::Approx(2.0 * a.sup_norms[i]));
  CHECK(a.slope < 0.0);
  CHECK_THROWS_AS(dispersive_decay_probe(VertexCoupling::kirchhoff(), f, std::vector<double>{2.0, 1.0}), Error);
}

TEST_CASE("log-log slope") {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * std::pow(xi, -0.5));
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-14));
  for (auto& yi : y) yi *= 1e5;
  CHECK(std::abs(loglog_slope(x, y) + 0.5) < 1e-12);
  CHECK_THROWS_AS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}
