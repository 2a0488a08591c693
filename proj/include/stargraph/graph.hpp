#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stargraph {

using cplx = std::complex<double>;
using Samples = std::vector<cplx>;

inline constexpr std::size_t kEdges = 3;

/// Uniform grid on one truncated edge: x_m = m * dx, m = 0 .. n_points-1.
/// The vertex sits at m = 0; the far end carries a homogeneous Dirichlet
/// condition.
struct GridSpec {
  double dx = 0.05;
  std::size_t n_points = 801;

  double length() const { return dx * static_cast<double>(n_points - 1); }
  double x(std::size_t m) const { return dx * static_cast<double>(m); }

  /// Throws invalid_parameter unless dx > 0 and n_points >= 16.
  void validate() const;

  static GridSpec from_length(double length, double dx);

  bool operator==(const GridSpec&) const = default;
};

/// State on the three-edge star graph. All edges share one GridSpec.
struct GraphField {
  GridSpec grid;
  std::array<Samples, kEdges> edges;

  static GraphField zeros(const GridSpec& grid);

  Samples& operator[](std::size_t j) { return edges[j]; }
  const Samples& operator[](std::size_t j) const { return edges[j]; }

  void validate() const;

  GraphField& operator+=(const GraphField& other);
  GraphField& operator-=(const GraphField& other);
  GraphField& operator*=(cplx c);
};

GraphField operator+(GraphField a, const GraphField& b);
GraphField operator-(GraphField a, const GraphField& b);
GraphField operator*(cplx c, GraphField a);

enum class CouplingKind { kirchhoff, delta, delta_prime };

const char* to_string(CouplingKind kind) noexcept;
CouplingKind parse_coupling_kind(const std::string& name);

/// Vertex condition. `strength` is alpha for delta, beta for delta-prime and
/// ignored for Kirchhoff.
struct VertexCoupling {
  CouplingKind kind = CouplingKind::kirchhoff;
  double strength = 0.0;

  static VertexCoupling kirchhoff() { return {CouplingKind::kirchhoff, 0.0}; }
  static VertexCoupling delta(double alpha) { return {CouplingKind::delta, alpha}; }
  static VertexCoupling delta_prime(double beta) { return {CouplingKind::delta_prime, beta}; }

  /// alpha >= 0 for delta, beta > 0 for delta-prime.
  void validate() const;

  /// Delta(0) is the Kirchhoff vertex; every operation dispatches on this.
  bool acts_as_kirchhoff() const {
    return kind == CouplingKind::kirchhoff || (kind == CouplingKind::delta && strength == 0.0);
  }
};

// ---------------------------------------------------------------------------
// Norms and functionals. Integrals are composite trapezoid per edge.

double trapezoid(std::span<const double> values, double dx);

/// (sum_j ||psi_j||_p^p)^(1/p); p = infinity gives the max modulus.
double lp_norm(const GraphField& field, double p);

double edge_mass(const GraphField& field, std::size_t j);
double mass(const GraphField& field);

/// L2 distance; the same quadrature as mass().
double l2_distance(const GraphField& a, const GraphField& b);

/// Mass in the outer `fraction` of every edge (truncation certificate).
double far_end_mass(const GraphField& field, double fraction);

/// dpsi/dx on one edge: 4th-order centred in the interior, 2nd-order
/// one-sided at both ends.
Samples edge_derivative(std::span<const cplx> psi, double dx);

/// dpsi/dx rule for the energy. Spectral differentiates each edge continued
/// past the vertex by the coupling's own reflection law (see propagator.hpp),
/// so there is no kink at x = 0 and it matches what the exact propagator
/// conserves.
enum class DerivativeRule { spectral, finite_difference };

/// sum_j int |psi_j'|^2 plus the coupling's vertex term.
double linear_energy(const GraphField& field, const VertexCoupling& coupling,
                     DerivativeRule rule = DerivativeRule::spectral);

/// Same, from derivative samples already taken.
double linear_energy(const GraphField& field, const VertexCoupling& coupling,
                     const std::array<Samples, kEdges>& derivative);

/// 1/2 E_lin - 1/4 ||Psi||_4^4.
double energy(const GraphField& field, const VertexCoupling& coupling,
              DerivativeRule rule = DerivativeRule::spectral);

struct BoundaryResidual {
  // Kirchhoff/delta: |psi1(0)-psi2(0)|, |psi2(0)-psi3(0)|, |sum psi_j'(0) - alpha psi1(0)|.
  // Delta-prime: |psi1'(0)-psi2'(0)|, |psi2'(0)-psi3'(0)|, |sum psi_j(0) - beta psi1'(0)|.
  double match_12 = 0.0;
  double match_23 = 0.0;
  double balance = 0.0;

  double max() const;
};

BoundaryResidual boundary_residual(const GraphField& field, const VertexCoupling& coupling);

/// Value and one-sided (second order) derivative at the vertex.
cplx vertex_value(const GraphField& field, std::size_t j);
cplx vertex_derivative(const GraphField& field, std::size_t j);

}  // namespace stargraph
