#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stargraph/graph.hpp"

namespace stargraph {

enum class Scheme { split_step_exact, crank_nicolson };

const char* to_string(Scheme scheme) noexcept;
Scheme parse_scheme(const std::string& name);

/// In-place linear stage L(dt) for a fixed dt.
using LinearStage = std::function<void(GraphField&)>;

/// Builds L(dt) for a grid. Used to swap in a different linear stage
/// (the negative-control fixture corrupts the propagator through this).
using LinearStageFactory = std::function<LinearStage(const GridSpec&, double dt)>;

struct EvolveConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::split_step_exact;
  VertexCoupling coupling;
  /// 0: the three-edge graph with `coupling`. 1..3: the two-edge
  /// Hamiltonian H_j instead (Kirchhoff between j and j+1, Dirichlet on the
  /// third edge); split-step only.
  int two_edge = 0;
  /// Wavenumber at which the split-step vertex reflection is made exact for
  /// delta and delta-prime couplings; 0 means q = 0.
  double matched_wavenumber = 0.0;
  std::size_t conservation_check_interval = 100;
  double far_end_mass_threshold = 1e-10;
  /// Outer part of each edge that the truncation certificate watches.
  double far_end_fraction = 0.05;
  bool record_energy = true;
  DerivativeRule energy_rule = DerivativeRule::spectral;
  std::optional<LinearStageFactory> linear_override;

  void validate() const;
};

/// Pointwise psi -> e^{i|psi|^2 dt} psi, the exact flow of i psi_t = -|psi|^2 psi.
GraphField nonlinear_phase_step(const GraphField& psi, double dt);
void nonlinear_phase_inplace(GraphField& psi, double dt);

/// N(dt/2) L(dt) N(dt/2) with the exact graph propagator.
GraphField strang_step(const GraphField& psi, double dt, const VertexCoupling& coupling);

/// One Crank-Nicolson step of the linear problem (no nonlinearity).
GraphField crank_nicolson_linear_step(const GraphField& psi, double dt, const VertexCoupling& coupling);

/// N(dt/2) CN(dt) N(dt/2).
GraphField crank_nicolson_step(const GraphField& psi, double dt, const VertexCoupling& coupling);

/// Crank-Nicolson for H_h = M^{-1} K, where K is the Hessian of the discrete
/// quadratic form
///   sum_j sum_m |psi_{j,m+1} - psi_{j,m}|^2 / dx + vertex term
/// and M holds the trapezoid weights. Kirchhoff and delta share one vertex
/// unknown (weight 3dx/2); delta-prime keeps one per edge (weight dx/2).
/// The far end is Dirichlet. Unitary in the trapezoid norm.
class CrankNicolson {
 public:
  CrankNicolson(const GridSpec& grid, const VertexCoupling& coupling, double dt);

  void apply(GraphField& field) const;

 private:
  struct Chain {
    // Thomas factorisation of a constant tridiagonal chain.
    std::vector<cplx> diag_inv, upper_scaled;
    cplx sub;
    void solve(std::vector<cplx>& rhs) const;
  };

  GridSpec grid_;
  VertexCoupling coupling_;
  double dt_;
  bool shared_vertex_;
  Chain chain_;
  std::vector<cplx> unit_response_;  // chain^{-1} e_0
  cplx vertex_denominator_;
  mutable std::array<std::vector<cplx>, kEdges> work_;
};

/// Stepper bound to one (grid, dt, config).
class Stepper {
 public:
  Stepper(const GridSpec& grid, double dt, const EvolveConfig& config);

  void step(GraphField& field) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  LinearStage linear_;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<std::array<double, kEdges>> edge_mass;
  std::vector<double> far_end_mass;

  /// Relative drifts against the first sample (start at 0).
  std::vector<double> mass_drift() const;
  std::vector<double> energy_drift() const;
  double max_abs_mass_drift() const;
  double max_abs_energy_drift() const;

  void append(const EvolutionTrace& other);

  /// Columns: t, mass, energy, mass_edge1..3, far_end_mass.
  void write_csv(std::ostream& out) const;
};

using Observer = std::function<void(double t, const GraphField& field)>;

struct EvolveResult {
  GraphField field;
  EvolutionTrace trace;
  std::size_t steps = 0;
  double dt_used = 0.0;
};

/// Advances psi0 from t_start to t_end. The step count is
/// ceil((t_end - t_start) / config.dt) and dt is shrunk to land on t_end.
/// Samples the trace (and calls observers) at t_start, every
/// conservation_check_interval steps and at t_end. Throws
/// TruncationViolation when far-end mass exceeds the threshold at a sample.
EvolveResult evolve(const GraphField& psi0, double t_start, double t_end, const EvolveConfig& config,
                    const std::vector<Observer>& observers = {});

}  // namespace stargraph
