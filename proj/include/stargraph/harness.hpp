#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stargraph/evolve.hpp"
#include "stargraph/reference.hpp"
#include "stargraph/scattering.hpp"

namespace stargraph {

struct ExperimentConfig {
  CouplingKind coupling = CouplingKind::kirchhoff;
  double coupling_parameter = 1.0;  // alpha~ or beta~; unused for Kirchhoff
  double v = 16.0;
  double delta = 0.4;
  double T = 0.5;
  std::optional<double> x0;           // default v^{1-delta}
  std::optional<double> dx;           // default min(0.05, pi / (4v))
  std::optional<double> dt;           // default min(dx / max(4, v), dx^2 / 2)
  std::optional<double> edge_length;  // default from the horizon, see resolved_edge_length
  double margin = 24.0;
  Scheme scheme = Scheme::split_step_exact;
  std::size_t phase3_snapshots = 6;
  double ratio_offset = 1.0;  // mass ratios at t2 + ratio_offset
  std::size_t incoming_edge = 0;
  double far_end_mass_threshold = 1e-10;
  std::size_t check_interval = 50;
  std::string output_dir;
  std::string label = "run";

  void validate() const;

  double resolved_x0() const;
  double resolved_dx() const;
  double resolved_dt() const;
  PhaseSchedule schedule() const;
  /// max(t3, t2 + ratio_offset).
  double horizon() const;
  /// max(x0 + 12, s * horizon) + margin, where s = 2 k_cut and k_cut is the
  /// smallest wavenumber with less than threshold / 10 of the initial mass
  /// above it (see spectral_speed_bound). The cutoff ramp spreads the datum
  /// over all wavenumbers, so the fastest radiation, not the soliton body,
  /// sets the edge length.
  double resolved_edge_length() const;
  GridSpec grid() const;
  VertexCoupling physical_coupling() const;
  RescaledCoefficients coefficients() const;
};

struct SnapshotMetrics {
  double t = 0.0;
  double mismatch = 0.0;  // ||Psi_t - sum_j Phi^j_t||
  double mass = 0.0;
  std::array<double, kEdges> ratio{};  // ||Psi^j_t|| / ||Psi_t||
};

struct ExperimentReport {
  ExperimentConfig config;
  PhaseSchedule schedule;
  RescaledCoefficients coeffs;
  GridSpec grid;
  double dt = 0.0;
  double x0 = 0.0;

  double e1 = 0.0;            // ||Psi_{t1} - Phi_{t1}||
  double e2 = 0.0;            // ||Psi_{t2} - Phi^{S,out}_{t2}||
  double e2_superposition = 0.0;  // ||Psi_{t2} - Phi^S_{t2}||
  std::vector<SnapshotMetrics> phase3;
  double e3_sup = 0.0;

  SnapshotMetrics at_ratio_time;
  std::array<double, kEdges> expected_ratio{};
  std::array<double, kEdges> ratio_error{};
  double ratio_error_max = 0.0;

  double mass_drift = 0.0;         // max over the trace
  double energy_drift = 0.0;       // max over the trace
  double mass_drift_final = 0.0;   // at the last sample, after the vertex has cleared
  double mass_closure = 0.0;  // |sum_j edge mass - mass| / mass at the ratio time
  double far_end_mass_max = 0.0;
  double line_rim_mass_max = 0.0;
  std::size_t steps = 0;

  EvolutionTrace trace;
  GraphField final_state;  // at the horizon
  std::array<GraphField, kEdges> reference_final;  // Phi^1..3 at the horizon
};

/// Runs the fast-soliton experiment: initial datum, evolution through
/// max(t3, t2 + ratio_offset), snapshots at t1, t2, t2 + ratio_offset and a
/// log-spaced set in (t2, t3]. Throws TruncationViolation if the graph or
/// the reference lines lose mass over their rims.
ExperimentReport run_scattering_experiment(const ExperimentConfig& config);

/// 2 k_cut for an edge profile: k_cut is the smallest |k| such that the
/// spectral mass of the zero-extended samples above |k| is at most
/// `tolerance`. Bounded by the grid Nyquist speed 2 pi / dx.
double spectral_speed_bound(std::span<const cplx> samples, double dx, double tolerance);

/// Moves expected per-edge values from the edge-1 frame to the incoming edge.
std::array<double, kEdges> permute(const std::array<double, kEdges>& in, std::size_t incoming_edge);

// ---------------------------------------------------------------------------
// Sweeps

struct CouplingChoice {
  CouplingKind kind = CouplingKind::kirchhoff;
  double parameter = 1.0;
  std::string name() const;
};

struct SweepRow {
  double v = 0.0;
  CouplingChoice coupling;
  bool ok = false;
  std::string error;
  double e1 = 0.0, e2 = 0.0, e3_sup = 0.0;
  std::array<double, kEdges> ratio_error{};
  double ratio_error_max = 0.0;
  double mass_drift = 0.0, energy_drift = 0.0;
};

struct SweepSlopes {
  CouplingChoice coupling;
  std::size_t points = 0;
  double e1 = 0.0, e2 = 0.0, e3_sup = 0.0, ratio_error = 0.0;
  bool e2_matches_minus_half_delta = false;  // |slope + delta/2| <= 0.3
  bool e3_negative = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // coupling-major, v ascending
  std::vector<SweepSlopes> slopes;

  void write_csv(std::ostream& out) const;
  void write_slopes_csv(std::ostream& out) const;
};

/// Runs every (coupling, v) pair with up to `workers` threads. A failed run
/// marks its row and the sweep continues. Rows come back in a fixed order
/// whatever the worker count.
SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& v_list,
                      const std::vector<CouplingChoice>& couplings, std::size_t workers = 1);

/// Least-squares slope of log y against log x over the entries with y > 0.
double fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Verification

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Suites: "unitarity", "kernels", "propagator", "conservation", "cross-scheme",
/// "soliton", "reference", "decay", "negative-control", "all".
std::vector<CheckResult> verify(const std::string& suite);

std::vector<std::string> verify_suite_names();

// Building blocks shared with the acceptance driver.

/// max | |r|^2 + 2|t|^2 - 1 | over k in [0.1, 100] (20 log points) and
/// alpha, beta in {0.1, 1, 10}.
double scattering_unitarity_defect();

struct PropagatorContract {
  double semigroup = 0.0;
  double reversal = 0.0;
  double mass_drift = 0.0;
  double delta0_vs_kirchhoff = 0.0;
};

/// Gaussian packet on edge 1 (centre 12, width 1.5, carrier e^{-5ix}) at
/// dx = 0.02, edge length 40, evolved through the vertex to t = 2.5.
PropagatorContract propagator_contract(const VertexCoupling& coupling);

struct OrderStudy {
  std::vector<double> steps;   // dt or dx per level
  std::vector<double> errors;
  std::vector<double> orders;  // log2 of successive error ratios
  double worst_step_mass_drift = 0.0;
};

/// Crank-Nicolson against the exact propagator for a packet crossing the
/// vertex; dt and dx halved together (dt = dx / 2) from dx = 0.04.
OrderStudy cross_scheme_study(const VertexCoupling& coupling, std::size_t levels = 4);

struct ConservationRun {
  double mass_drift = 0.0;
  double energy_drift = 0.0;        // max over the trace
  double energy_drift_final = 0.0;  // at the last sample
  std::size_t steps = 0;
};

/// Kirchhoff split-step run of a v = 2 soliton crossing the vertex.
ConservationRun conservation_run(double dx, double dt, std::size_t steps);

struct FidelityRun {
  double dx = 0.0;
  double dt = 0.0;
  double error = 0.0;  // max over sampled t of the L2 profile error
};

/// Soliton v = 4 on the two-edge Kirchhoff line (edge 3 frozen at zero)
/// over t in [0, 5], compared with the closed form.
FidelityRun soliton_fidelity(double dx, double dt, const std::optional<LinearStageFactory>& linear = std::nullopt);

}  // namespace stargraph
