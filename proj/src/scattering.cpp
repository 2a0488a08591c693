#include "stargraph/scattering.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stargraph/error.hpp"

namespace stargraph {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_positive_velocity(double v) { require(v > 0.0 && std::isfinite(v), "velocity must be positive"); }

}  // namespace

ScatteringCoefficients scattering_coefficients(const VertexCoupling& coupling, double k) {
  coupling.validate();
  require(k > 0.0 && std::isfinite(k), "scattering data needs k > 0");
  ScatteringCoefficients s{{}, {}, k, coupling};
  switch (coupling.kind) {
    case CouplingKind::kirchhoff:
      s.r = -1.0 / 3.0;
      s.t = 2.0 / 3.0;
      break;
    case CouplingKind::delta: {
      const double alpha = coupling.strength;
      const cplx den{3.0 * k, alpha};
      s.r = -cplx{k, alpha} / den;
      s.t = 2.0 * k / den;
      break;
    }
    case CouplingKind::delta_prime: {
      const double bk = coupling.strength * k;
      const cplx den{bk, 3.0};
      s.r = cplx{bk, 1.0} / den;
      s.t = -2.0 * kI / den;
      break;
    }
  }
  return s;
}

RescaledCoefficients rescaled_coefficients(CouplingKind kind, double parameter, double v) {
  require_positive_velocity(v);
  RescaledCoefficients c{{}, {}, kind, parameter, v};
  switch (kind) {
    case CouplingKind::kirchhoff:
      c.r = -1.0 / 3.0;
      c.t = 2.0 / 3.0;
      break;
    case CouplingKind::delta: {
      require(parameter >= 0.0, "alpha~ must be non-negative");
      const cplx den{3.0, 2.0 * parameter};
      c.r = -cplx{1.0, 2.0 * parameter} / den;
      c.t = 2.0 / den;
      break;
    }
    case CouplingKind::delta_prime: {
      require(parameter > 0.0, "beta~ must be positive");
      const cplx den{parameter, 6.0};
      c.r = cplx{parameter, 2.0} / den;
      c.t = -4.0 * kI / den;
      break;
    }
  }
  return c;
}

VertexCoupling rescaled_coupling(CouplingKind kind, double parameter, double v) {
  require_positive_velocity(v);
  switch (kind) {
    case CouplingKind::kirchhoff: return VertexCoupling::kirchhoff();
    case CouplingKind::delta: return VertexCoupling::delta(parameter * v);
    case CouplingKind::delta_prime: return VertexCoupling::delta_prime(parameter / v);
  }
  return VertexCoupling::kirchhoff();
}

RescaledCoefficients rescaled_via_direct(CouplingKind kind, double parameter, double v) {
  const auto s = scattering_coefficients(rescaled_coupling(kind, parameter, v), 0.5 * v);
  return {s.r, s.t, kind, parameter, v};
}

KernelMatrix resolvent_kernel(const VertexCoupling& coupling, cplx k, double x, double y) {
  coupling.validate();
  require(k.imag() > 0.0, "resolvent needs Im k > 0");
  require(x >= 0.0 && y >= 0.0, "kernel arguments live on the half-line");
  const cplx pre = kI / (2.0 * k);
  const cplx direct = pre * std::exp(kI * k * std::abs(x - y));
  const cplx image = pre * std::exp(kI * k * (x + y));

  cplx diag, off;
  switch (coupling.kind) {
    case CouplingKind::kirchhoff:
      diag = -image / 3.0;
      off = 2.0 * image / 3.0;
      break;
    case CouplingKind::delta: {
      const double alpha = coupling.strength;
      const cplx scale = -image / (alpha - 3.0 * kI * k);
      diag = scale * (alpha - kI * k);
      off = scale * (2.0 * kI * k);
      break;
    }
    case CouplingKind::delta_prime: {
      const double beta = coupling.strength;
      const cplx scale = -image / (3.0 - kI * beta * k);
      diag = scale * (-1.0 + kI * beta * k);
      off = scale * 2.0;
      break;
    }
  }
  KernelMatrix m{};
  for (std::size_t i = 0; i < kEdges; ++i)
    for (std::size_t j = 0; j < kEdges; ++j) m[i][j] = (i == j) ? direct + diag : off;
  return m;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

struct PanelSum {
  cplx value{};
  double error = 0.0;
};

// Adaptive Gauss-Kronrod over [lo, hi] of a complex integrand.
template <class F>
void add_panel(PanelSum& acc, F&& f, double lo, double hi) {
  double err_re = 0.0, err_im = 0.0;
  const double re = gauss_kronrod<double, 21>::integrate([&](double s) { return f(s).real(); }, lo, hi, 12,
                                                         1e-13, &err_re);
  const double im = gauss_kronrod<double, 21>::integrate([&](double s) { return f(s).imag(); }, lo, hi, 12,
                                                         1e-13, &err_im);
  acc.value += cplx{re, im};
  acc.error += err_re + err_im;
}

}  // namespace

KernelIdentityValue kernel_identity_check(double a, double t, double z) {
  require(a > 0.0 && t > 0.0 && z > 0.0, "kernel identity needs a, t, z > 0");
  constexpr double pi = std::numbers::pi;
  const cplx omega = std::exp(cplx{0.0, -pi / 4.0});

  // Left side on k = s * omega: the chirp becomes the Gaussian e^{-t s^2}.
  PanelSum lhs;
  {
    const auto f = [&](double s) {
      const cplx k = s * omega;
      return omega * std::exp(kI * k * z - t * s * s) / (a - kI * k) / (2.0 * pi);
    };
    const double growth = z / std::numbers::sqrt2;
    const double s_max = (growth + std::sqrt(growth * growth + 4.0 * t * 60.0)) / (2.0 * t);
    const double s_min = -std::sqrt(60.0 / t);
    const int panels = 64;
    for (int p = 0; p < panels; ++p) {
      const double lo = s_min + (s_max - s_min) * p / panels;
      const double hi = s_min + (s_max - s_min) * (p + 1) / panels;
      add_panel(lhs, f, lo, hi);
    }
  }

  // Right side on u = rho * conj(omega) = rho e^{i pi/4}: the integrand is
  // entire and decays in the sector 0 <= arg u <= pi/4, and on the ray
  // e^{i(z+u)^2/4t} picks up e^{-rho^2/4t}.
  PanelSum rhs;
  {
    const cplx norm = std::sqrt(4.0 * pi * t) * std::exp(cplx{0.0, pi / 4.0});
    const cplx ray = std::conj(omega);
    const auto f = [&](double rho) {
      const cplx u = rho * ray;
      const cplx w = z + u;
      return ray * std::exp(-a * u + kI * w * w / (4.0 * t)) / norm;
    };
    const double rho_max = std::sqrt(4.0 * t * 60.0);
    const int panels = 64;
    for (int p = 0; p < panels; ++p) add_panel(rhs, f, rho_max * p / panels, rho_max * (p + 1) / panels);
  }

  KernelIdentityValue out{lhs.value, rhs.value, lhs.error, rhs.error};
  if (!std::isfinite(std::abs(out.lhs)) || !std::isfinite(std::abs(out.rhs)) || out.lhs_error > 1e-8 ||
      out.rhs_error > 1e-8) {
    std::ostringstream msg;
    msg << "kernel identity quadrature did not converge (a=" << a << ", t=" << t << ", z=" << z
        << ", lhs_err=" << out.lhs_error << ", rhs_err=" << out.rhs_error << ")";
    fail(ErrorCode::numeric_failure, msg.str());
  }
  return out;
}

}  // namespace stargraph
