#pragma once

#include <array>
#include <vector>

#include "stargraph/graph.hpp"
#include "stargraph/scattering.hpp"

namespace stargraph {

/// phi(y) = sqrt(2) sech(y).
double sech_profile(double y);

/// Soliton e^{ivx/2} e^{-itv^2/4} e^{it} phi(x - x0 - vt); v may be negative.
struct SolitonParams {
  double x0 = 0.0;
  double v = 0.0;

  cplx value(double x, double t) const;
  Samples sample(std::span<const double> xs, double t) const;
};

/// C-infinity ramp: 0 on (-inf, 1], 1 on [2, inf), g(x-1)/(g(x-1)+g(2-x)).
double cutoff_chi(double x);

/// x0 >= v^{1-delta} is required.
double minimal_x0(double v, double delta);

/// Edge 1 carries chi(x) e^{-ivx/2} phi(x - x0); edges 2 and 3 are zero.
/// `incoming_edge` (0-based) moves that profile to another edge.
GraphField initial_datum(double x0, double v, double delta, const GridSpec& grid, std::size_t incoming_edge = 0);

struct PhaseSchedule {
  double x0 = 0.0;
  double v = 0.0;
  double delta = 0.0;
  double T = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
};

/// t1 = x0/v - v^{-delta}, t2 = x0/v + v^{-delta}, t3 = t2 + T ln v.
PhaseSchedule phase_schedule(double x0, double v, double delta, double T);

/// The incoming soliton, continued past the vertex onto edge 2:
///   edge 1: e^{-iv^2t/4} e^{-ivx/2} e^{it} phi(x - x0 + vt)
///   edge 2: e^{-iv^2t/4} e^{ ivx/2} e^{it} phi(x + x0 - vt)
GraphField truth_soliton(double x0, double v, double t, const GridSpec& grid, std::size_t incoming_edge = 0);

struct Superposition {
  GraphField incoming;  // phi_{x0,-v}(t) on the incoming edge
  GraphField outgoing;  // r~ phi_{-x0,v}(t) on the incoming edge, t~ phi_{-x0,v}(t) on the others
  GraphField total() const { return incoming + outgoing; }
};

Superposition phase2_superposition(double x0, double v, const RescaledCoefficients& coeffs, double t,
                                   const GridSpec& grid, std::size_t incoming_edge = 0);

/// On-graph mass of phi(x + y) on x >= 0: 4e^{-2y} / (1 + e^{-2y}).
double tail_mass_closed_form(double y);

/// Same by adaptive quadrature of 2 sech^2 on [y, inf).
double tail_mass_quadrature(double y);

// ---------------------------------------------------------------------------
// Line problems

/// Periodic line grid with samples at x_i = (i - origin) * dx, i = 0 .. N-1.
struct LineField {
  double dx = 0.0;
  std::size_t origin = 0;
  Samples values;

  static LineField zeros(double dx, double half_width);

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return dx * (static_cast<double>(i) - static_cast<double>(origin)); }
  double half_width() const { return dx * static_cast<double>(origin); }
  double mass() const;
  /// Mass in the outer `fraction` of the box on both sides.
  double rim_mass(double fraction) const;
};

struct LineEvolveConfig {
  double dt = 1e-3;
  double rim_fraction = 0.05;
  double rim_mass_threshold = 1e-10;
  std::size_t check_interval = 100;
};

/// Strang split-step Fourier for i u_t = -u_xx - |u|^2 u on the periodic box.
/// Throws TruncationViolation if mass reaches the rim at a check.
LineField free_line_nls_evolve(const LineField& u0, double t_span, const LineEvolveConfig& config);

/// Linear free evolution e^{i t d^2/dx^2} on the periodic box.
LineField free_line_linear_evolve(const LineField& u0, double t);

// ---------------------------------------------------------------------------
// Reference bundle

/// Phi^1, Phi^2, Phi^3 at one time t >= t2, held as the two line solutions
/// phi^ref (shared by Phi^1) and phi^tr (shared by Phi^2 and Phi^3) of the
/// line NLS, started at t2 from r~ e^{ivy/2} phi(y - v^{1-delta}) and
/// t~ e^{ivy/2} phi(y - v^{1-delta}).
struct ReferenceBundle {
  PhaseSchedule schedule;
  RescaledCoefficients coeffs;
  double time = 0.0;
  std::size_t incoming_edge = 0;
  LineField phi_ref;
  LineField phi_tr;

  /// Folds the lines onto the graph. Phi^1 lives on (incoming, incoming+1),
  /// Phi^2 on (incoming+1, incoming+2), Phi^3 on (incoming+2, incoming).
  std::array<GraphField, 3> fields(const GridSpec& grid) const;
  GraphField sum(const GridSpec& grid) const;
};

/// Builds the bundle at t2. The line box has half-width `half_width` and
/// spacing grid.dx so that folding is exact sampling.
ReferenceBundle outgoing_profiles_at_t2(const RescaledCoefficients& coeffs, const PhaseSchedule& schedule,
                                        const GridSpec& grid, double half_width, std::size_t incoming_edge = 0);

/// Advances both lines by the line NLS flow to time t (t >= bundle.time).
ReferenceBundle advance_reference(const ReferenceBundle& bundle, double t, const LineEvolveConfig& config);

/// Restriction of a line to an edge: out[m] = u(sign * m dx).
Samples fold_line(const LineField& line, const GridSpec& grid, int sign);

}  // namespace stargraph
