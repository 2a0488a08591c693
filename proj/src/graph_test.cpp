#include <doctest.h>

#include <cmath>
#include <limits>

#include "stargraph/error.hpp"
#include "stargraph/graph.hpp"
#include "stargraph/reference.hpp"

using namespace stargraph;

namespace {

GraphField soliton_on_edge(const GridSpec& g, double x0, std::size_t edge = 0) {
  GraphField f = GraphField::zeros(g);
  for (std::size_t m = 0; m < g.n_points; ++m) f[edge][m] = sech_profile(g.x(m) - x0);
  return f;
}

}  // namespace

TEST_CASE("grid spec invariants") {
  CHECK_THROWS_AS((GridSpec{0.0, 100}.validate()), Error);
  CHECK_THROWS_AS((GridSpec{0.1, 15}.validate()), Error);
  const GridSpec g = GridSpec::from_length(40.0, 0.05);
  CHECK(g.n_points == 801);
  CHECK(g.length() == doctest::Approx(40.0).epsilon(1e-14));
}

TEST_CASE("field arithmetic and validation") {
  const GridSpec g = GridSpec::from_length(10.0, 0.1);
  GraphField a = GraphField::zeros(g);
  a[1][3] = {1.0, 2.0};
  GraphField b = a + a;
  CHECK(b[1][3] == cplx(2.0, 4.0));
  b -= a;
  CHECK(b[1][3] == a[1][3]);
  CHECK((cplx(0.0, 1.0) * a)[1][3] == cplx(-2.0, 1.0));
  a[2].pop_back();
  CHECK_THROWS_AS(a.validate(), Error);
}

TEST_CASE("lp norms") {
  const GridSpec g = GridSpec::from_length(40.0, 0.01);
  const GraphField zero = GraphField::zeros(g);
  for (double p : {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()}) CHECK(lp_norm(zero, p) == 0.0);
  CHECK_THROWS_AS(lp_norm(zero, 0.5), Error);

  const GraphField s = soliton_on_edge(g, 20.0);
  // int 2 sech^2 = 4
  CHECK(mass(s) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(lp_norm(s, std::numeric_limits<double>::infinity()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  const cplx c{-1.5, 0.7};
  for (double p : {1.0, 2.0, 3.0, 4.0})
    CHECK(lp_norm(c * s, p) == doctest::Approx(std::abs(c) * lp_norm(s, p)).epsilon(1e-12));
}

TEST_CASE("mass is additive over edges") {
  const GridSpec g = GridSpec::from_length(30.0, 0.05);
  GraphField f = soliton_on_edge(g, 10.0, 0);
  for (std::size_t m = 0; m < g.n_points; ++m) f[2][m] = 0.3 * sech_profile(g.x(m) - 14.0);
  CHECK(mass(f) == doctest::Approx(edge_mass(f, 0) + edge_mass(f, 1) + edge_mass(f, 2)).epsilon(1e-15));
  CHECK(edge_mass(f, 1) == 0.0);
}

TEST_CASE("energy of a standing soliton") {
  const GridSpec g = GridSpec::from_length(40.0, 0.02);
  const GraphField s = soliton_on_edge(g, 20.0);
  // 1/2 * 4/3 - 1/4 * 16/3
  const double expected = -2.0 / 3.0;
  CHECK(energy(s, VertexCoupling::kirchhoff()) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(energy(s, VertexCoupling::kirchhoff(), DerivativeRule::finite_difference) ==
        doctest::Approx(expected).epsilon(1e-6));
  // vertex value ~ 2 sech(20): the delta term is invisible
  CHECK(energy(s, VertexCoupling::delta(5.0)) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(energy(s, VertexCoupling::delta_prime(2.0)) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("delta(0) energy is the kirchhoff energy") {
  const GridSpec g = GridSpec::from_length(20.0, 0.05);
  GraphField f = GraphField::zeros(g);
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < g.n_points; ++m)
      f[j][m] = std::polar(std::exp(-0.3 * g.x(m) * g.x(m)) * (1.0 + 0.1 * j), 0.4 * g.x(m));
  for (auto rule : {DerivativeRule::spectral, DerivativeRule::finite_difference})
    CHECK(energy(f, VertexCoupling::delta(0.0), rule) == energy(f, VertexCoupling::kirchhoff(), rule));
  CHECK(VertexCoupling::delta(0.0).acts_as_kirchhoff());
  CHECK_FALSE(VertexCoupling::delta(1e-9).acts_as_kirchhoff());
}

TEST_CASE("vertex energy terms") {
  const GridSpec g = GridSpec::from_length(20.0, 0.05);
  GraphField f = GraphField::zeros(g);
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < g.n_points; ++m) f[j][m] = std::exp(-g.x(m) * g.x(m));
  // finite differences: the spectral derivative depends on the coupling's reflection law
  const auto fd = DerivativeRule::finite_difference;
  const double kin = linear_energy(f, VertexCoupling::kirchhoff(), fd);
  CHECK(linear_energy(f, VertexCoupling::delta(2.0), fd) == doctest::Approx(kin + 2.0).epsilon(1e-14));
  // |sum psi_j(0)|^2 / beta = 9 / 4
  CHECK(linear_energy(f, VertexCoupling::delta_prime(4.0), fd) == doctest::Approx(kin + 9.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("boundary residuals") {
  const GridSpec g = GridSpec::from_length(10.0, 0.01);
  GraphField sym = GraphField::zeros(g);
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < g.n_points; ++m) sym[j][m] = std::exp(-g.x(m) * g.x(m));
  const auto r = boundary_residual(sym, VertexCoupling::kirchhoff());
  CHECK(r.match_12 == 0.0);
  CHECK(r.match_23 == 0.0);
  CHECK(r.balance < 1e-3);  // one-sided stencil of a zero slope

  GraphField jump = GraphField::zeros(g);
  jump[0][0] = 1.0;
  CHECK(boundary_residual(jump, VertexCoupling::kirchhoff()).match_12 == doctest::Approx(1.0));
}

TEST_CASE("edge derivative is fourth order inside") {
  for (double dx : {0.02, 0.01}) {
    const GridSpec g = GridSpec::from_length(6.0, dx);
    Samples s(g.n_points);
    for (std::size_t m = 0; m < g.n_points; ++m) s[m] = std::sin(g.x(m));
    const Samples d = edge_derivative(s, dx);
    double err = 0.0;
    for (std::size_t m = 2; m + 2 < g.n_points; ++m) err = std::max(err, std::abs(d[m] - std::cos(g.x(m))));
    CHECK(err < 2.0 * std::pow(dx, 4));
  }
}

TEST_CASE("coupling names") {
  for (auto k : {CouplingKind::kirchhoff, CouplingKind::delta, CouplingKind::delta_prime})
    CHECK(parse_coupling_kind(to_string(k)) == k);
  CHECK(parse_coupling_kind("delta-prime") == CouplingKind::delta_prime);
  CHECK_THROWS_AS(parse_coupling_kind("robin"), Error);
  CHECK_THROWS_AS(VertexCoupling::delta(-1.0).validate(), Error);
  CHECK_THROWS_AS(VertexCoupling::delta_prime(0.0).validate(), Error);
}
