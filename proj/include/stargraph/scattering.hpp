#pragma once

#include <array>
#include <complex>

#include "stargraph/graph.hpp"

namespace stargraph {

/// Plane-wave reflection/transmission amplitudes at wavenumber k.
struct ScatteringCoefficients {
  cplx r;
  cplx t;
  double k = 0.0;
  VertexCoupling coupling;

  /// |r|^2 + 2|t|^2 - 1.
  double unitarity_defect() const { return std::norm(r) + 2.0 * std::norm(t) - 1.0; }
};

/// Coefficients in the fast-soliton regime: alpha = alpha~ v, beta = beta~ / v
/// and k = v/2. `parameter` is alpha~ or beta~ (unused for Kirchhoff).
struct RescaledCoefficients {
  cplx r;
  cplx t;
  CouplingKind kind = CouplingKind::kirchhoff;
  double parameter = 0.0;
  double v = 0.0;

  double unitarity_defect() const { return std::norm(r) + 2.0 * std::norm(t) - 1.0; }
};

ScatteringCoefficients scattering_coefficients(const VertexCoupling& coupling, double k);

/// Closed form in the rescaled variables.
RescaledCoefficients rescaled_coefficients(CouplingKind kind, double parameter, double v);

/// The physical coupling that the rescaled family selects at velocity v.
VertexCoupling rescaled_coupling(CouplingKind kind, double parameter, double v);

/// The same numbers computed through scattering_coefficients at k = v/2.
RescaledCoefficients rescaled_via_direct(CouplingKind kind, double parameter, double v);

using KernelMatrix = std::array<std::array<cplx, kEdges>, kEdges>;

/// Integral kernel of (H - k^2)^{-1} at (x, y); requires Im k > 0.
KernelMatrix resolvent_kernel(const VertexCoupling& coupling, cplx k, double x, double y);

struct KernelIdentityValue {
  cplx lhs;
  cplx rhs;
  double lhs_error = 0.0;  // quadrature error estimates
  double rhs_error = 0.0;
};

/// Both sides of
///   (1/2pi) int e^{ikz} e^{-ik^2 t} / (a - ik) dk
///     = int_0^inf e^{-au} e^{i(z+u)^2/4t} / sqrt(4 pi i t) du
/// by independent adaptive quadratures. The left side is integrated along
/// the rotated contour k = s e^{-i pi/4}, the right side along the ray
/// u = rho e^{i pi/4}. Throws numeric_failure when either side does not converge.
KernelIdentityValue kernel_identity_check(double a, double t, double z);

}  // namespace stargraph
