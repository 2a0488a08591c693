#include <doctest.h>

#include <cmath>

#include "stargraph/error.hpp"
#include "stargraph/scattering.hpp"

using namespace stargraph;

namespace {

double max_abs(const KernelMatrix& m) {
  double out = 0.0;
  for (const auto& row : m)
    for (const auto& z : row) out = std::max(out, std::abs(z));
  return out;
}

}  // namespace

TEST_CASE("kirchhoff scattering constants") {
  const auto s = scattering_coefficients(VertexCoupling::kirchhoff(), 1.0);
  CHECK(s.r == cplx(-1.0 / 3.0, 0.0));
  CHECK(s.t == cplx(2.0 / 3.0, 0.0));
  const auto d0 = scattering_coefficients(VertexCoupling::delta(0.0), 2.0);
  CHECK(std::abs(d0.r + 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(d0.t - 2.0 / 3.0) < 1e-15);
}

TEST_CASE("delta-prime becomes totally reflecting at large beta k") {
  const auto s = scattering_coefficients(VertexCoupling::delta_prime(1.0), 1e8);
  CHECK(std::abs(s.r - 1.0) < 1e-7);
  CHECK(std::abs(s.t) < 1e-7);
}

TEST_CASE("unitarity on the log grid") {
  for (double s : {0.1, 1.0, 10.0})
    for (int i = 0; i < 20; ++i) {
      const double k = 0.1 * std::pow(1000.0, i / 19.0);
      for (const auto& c : {VertexCoupling::delta(s), VertexCoupling::delta_prime(s)}) {
        const auto sc = scattering_coefficients(c, k);
        CHECK(std::abs(std::norm(sc.r) + 2.0 * std::norm(sc.t) - 1.0) < 1e-12);
      }
    }
}

TEST_CASE("scattering rejects k <= 0") {
  CHECK_THROWS_AS(scattering_coefficients(VertexCoupling::kirchhoff(), 0.0), Error);
  CHECK_THROWS_AS(scattering_coefficients(VertexCoupling::delta(1.0), -1.0), Error);
}

TEST_CASE("rescaled coefficients") {
  for (double v : {2.0, 16.0, 100.0}) {
    const auto k = rescaled_coefficients(CouplingKind::kirchhoff, 0.0, v);
    CHECK(k.r == cplx(-1.0 / 3.0, 0.0));
    CHECK(k.t == cplx(2.0 / 3.0, 0.0));
  }
  const auto d = rescaled_coefficients(CouplingKind::delta, 1.0, 7.0);
  CHECK(std::abs(d.r + cplx(1.0, 2.0) / cplx(3.0, 2.0)) < 1e-15);

  const auto wall = rescaled_coefficients(CouplingKind::delta, 1e8, 8.0);
  CHECK(std::abs(wall.r + 1.0) < 1e-7);
  CHECK(std::abs(wall.t) < 1e-7);

  CHECK_THROWS_AS(rescaled_coefficients(CouplingKind::delta, 1.0, 0.0), Error);
  CHECK_THROWS_AS(rescaled_coefficients(CouplingKind::delta_prime, 0.0, 4.0), Error);
}

TEST_CASE("rescaled and direct paths agree") {
  for (auto kind : {CouplingKind::kirchhoff, CouplingKind::delta, CouplingKind::delta_prime})
    for (double p : {0.1, 1.0, 10.0})
      for (double v : {2.0, 8.0, 32.0}) {
        const auto a = rescaled_coefficients(kind, p, v);
        const auto b = rescaled_via_direct(kind, p, v);
        CHECK(std::abs(a.r - b.r) < 1e-14);
        CHECK(std::abs(a.t - b.t) < 1e-14);
        CHECK(std::abs(a.unitarity_defect()) < 1e-12);
      }
}

TEST_CASE("resolvent kernel structure") {
  const cplx k{1.3, 0.4};
  CHECK_THROWS_AS(resolvent_kernel(VertexCoupling::kirchhoff(), cplx(1.0, 0.0), 0.0, 0.0), Error);
  CHECK_THROWS_AS(resolvent_kernel(VertexCoupling::kirchhoff(), k, -1.0, 0.0), Error);

  const auto a = resolvent_kernel(VertexCoupling::kirchhoff(), k, 0.7, 0.2);
  const auto b = resolvent_kernel(VertexCoupling::delta(0.0), k, 0.7, 0.2);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a[i][j] - b[i][j]) < 1e-15);

  // off-diagonal entries depend on x + y only
  for (const auto& c : {VertexCoupling::kirchhoff(), VertexCoupling::delta(2.0), VertexCoupling::delta_prime(0.5)}) {
    const auto p = resolvent_kernel(c, k, 0.3, 0.9);
    const auto q = resolvent_kernel(c, k, 1.0, 0.2);
    CHECK(std::abs(p[0][1] - q[0][1]) < 1e-15);
    // symmetric under (x, y) exchange with transpose
    const auto r = resolvent_kernel(c, k, 0.9, 0.3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(p[i][j] - r[j][i]) < 1e-15);
  }
}

TEST_CASE("resolvent rows satisfy the vertex conditions") {
  const cplx k{0.8, 0.5};
  const double y = 0.6, h = 1e-5;
  for (const auto& c : {VertexCoupling::kirchhoff(), VertexCoupling::delta(1.5), VertexCoupling::delta_prime(0.7)}) {
    const auto k0 = resolvent_kernel(c, k, 0.0, y);
    const auto k1 = resolvent_kernel(c, k, h, y);
    const auto k2 = resolvent_kernel(c, k, 2.0 * h, y);
    for (std::size_t col = 0; col < 3; ++col) {
      cplx value[3], slope[3];
      for (std::size_t i = 0; i < 3; ++i) {
        value[i] = k0[i][col];
        slope[i] = (-3.0 * k0[i][col] + 4.0 * k1[i][col] - k2[i][col]) / (2.0 * h);
      }
      const double scale = max_abs(k0);
      if (c.kind == CouplingKind::delta_prime) {
        CHECK(std::abs(slope[0] - slope[1]) < 1e-7 * scale);
        CHECK(std::abs(value[0] + value[1] + value[2] - c.strength * slope[0]) < 1e-6);
      } else {
        CHECK(std::abs(value[0] - value[1]) < 1e-14);
        CHECK(std::abs(value[1] - value[2]) < 1e-14);
        const double alpha = c.kind == CouplingKind::delta ? c.strength : 0.0;
        CHECK(std::abs(slope[0] + slope[1] + slope[2] - alpha * value[0]) < 1e-6);
      }
    }
  }
}

TEST_CASE("resolvent solves the free equation away from the diagonal") {
  const cplx k{1.1, 0.3};
  const double y = 0.4, x = 1.3, h = 1e-3;
  const auto c = VertexCoupling::delta(2.0);
  const auto m = resolvent_kernel(c, k, x - h, y);
  const auto z = resolvent_kernel(c, k, x, y);
  const auto p = resolvent_kernel(c, k, x + h, y);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const cplx lap = (m[i][j] - 2.0 * z[i][j] + p[i][j]) / (h * h);
      CHECK(std::abs(-lap - k * k * z[i][j]) < 1e-6);
    }
}

TEST_CASE("strong delta gives the dirichlet limit") {
  const auto m = resolvent_kernel(VertexCoupling::delta(1e6), cplx(1.0, 0.5), 0.0, 0.8);
  for (const auto& row : m)
    for (const auto& z : row) CHECK(std::abs(z) < 1e-5);
}

TEST_CASE("kernel identity") {
  const auto v = kernel_identity_check(1.0, 1.0, 1.0);
  CHECK(std::abs(v.lhs - v.rhs) < 1e-6);
  const auto far = kernel_identity_check(200.0, 1.0, 1.0);
  CHECK(std::abs(far.lhs) < 1e-2);
  CHECK(std::abs(far.rhs) < 1e-2);
  CHECK(std::abs(far.lhs - far.rhs) < 1e-6);
  CHECK_THROWS_AS(kernel_identity_check(0.0, 1.0, 1.0), Error);
}

TEST_CASE("kernel identity scaling") {
  // k -> k s leaves both sides unchanged
  const double s = 2.0;
  const auto a = kernel_identity_check(0.5, 2.0, 1.0);
  const auto b = kernel_identity_check(0.5 * s, 2.0 / (s * s), 1.0 / s);
  CHECK(std::abs(b.lhs - a.lhs) < 1e-8);
  CHECK(std::abs(b.rhs - a.rhs) < 1e-8);
}
