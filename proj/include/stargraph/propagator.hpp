#pragma once

#include <array>
#include <span>
#include <vector>

#include "stargraph/graph.hpp"

namespace stargraph {

/// Periodic line grid that hosts one edge plus its mirror image:
/// positions m*dx for m in (-(n-1), n-1), stored FFT-style (negative m wrap
/// to the top of the array) and zero-padded up to `size`.
struct LineLayout {
  double dx = 0.0;
  std::size_t edge_points = 0;
  std::size_t size = 0;
  std::vector<double> wavenumbers;

  static LineLayout for_grid(const GridSpec& grid, double padding = kDefaultPadding);

  std::size_t index_of(std::ptrdiff_t m) const {
    return static_cast<std::size_t>((m % static_cast<std::ptrdiff_t>(size) + static_cast<std::ptrdiff_t>(size)) %
                                    static_cast<std::ptrdiff_t>(size));
  }

  /// The full-line span is at least padding * edge length.
  static constexpr double kDefaultPadding = 4.0;
};

/// Multiplier e^{-i k^2 t} / N on a layout, folded with the inverse-FFT
/// normalisation.
std::vector<cplx> free_multiplier(const LineLayout& layout, double t);

/// In-place free Schroedinger evolution of a periodic line array.
void free_evolve(std::vector<cplx>& line, const std::vector<cplx>& multiplier);

struct HalfLinePair {
  Samples minus;  // U_t^- psi
  Samples plus;   // U_t^+ psi
};

/// U_t^- psi and U_t^+ psi on the edge grid: free evolution of the zero
/// extension of psi, read at +x and at -x. The vertex sample of the zero
/// extension is psi(0)/2 (the jump midpoint), so t = 0 returns the t -> 0
/// limit: psi with half weight at the vertex, and psi(0)/2 at x = 0 only.
HalfLinePair apply_half_line_propagators(std::span<const cplx> psi, const GridSpec& grid, double t);

/// How an edge continues past the vertex, per wavenumber: the line
/// transform of the extended edge j is F_j(q) + sum_k M_jk(q) F_k(-q), with F
/// the transform of the zero extension. M(q) = matrix + R(q) J / 3 when the
/// sum channel S = psi_1 + psi_2 + psi_3 obeys S' = rate * S at the vertex,
/// otherwise M = matrix.
///
/// R is the half-line Robin reflection -(a + iq)/(a - iq) taken at the
/// warped wavenumber (2/dx) tan(q dx / 2). That makes it the symbol of a
/// kernel living on x <= 0 only, so restricting and re-extending is exact
/// and steps compose; the price is an O(dx^2) error in the reflection phase.
struct VertexReflection {
  std::array<std::array<double, kEdges>, kEdges> matrix{};
  bool robin = false;
  double rate = 0.0;
  /// If positive, the rate is rescaled so that R is exact at this wavenumber
  /// instead of at q = 0.
  double matched_wavenumber = 0.0;

  cplx sum_channel(double q, double dx) const;
  /// rho = (2 - a dx) / (2 + a dx) for the effective rate a;
  /// R = -(z - rho) / (1 - rho z), z = e^{iq dx}.
  double pole(double dx) const;
};

VertexReflection reflection_for(const VertexCoupling& coupling);

/// Kirchhoff between edges j and j+1 (mod 3), Dirichlet on the third edge.
/// j is 1-based, as in the two-edge Hamiltonians H_1, H_2, H_3.
VertexReflection reflection_for_two_edge(int j);

/// e^{-iHt} for a fixed grid, vertex law and time. Holds scratch buffers, so
/// one instance should not be shared between threads.
class GraphPropagator {
 public:
  GraphPropagator(const GridSpec& grid, const VertexReflection& reflection, double t,
                  double padding = LineLayout::kDefaultPadding);

  void apply(GraphField& field) const;

  /// d/dx of every edge, by spectral differentiation of the extended lines
  /// (t plays no part).
  std::array<Samples, kEdges> derivative(const GraphField& field) const;

  const LineLayout& layout() const { return layout_; }
  double time() const { return t_; }

 private:
  GridSpec grid_;
  VertexReflection reflection_;
  double t_;
  LineLayout layout_;

  // fills out_ with the line transforms of the extended edges
  void extend(const GraphField& field) const;
  std::vector<cplx> multiplier_;
  std::vector<cplx> robin_;  // R(q) per line index, empty without a Robin channel
  mutable std::array<std::vector<cplx>, kEdges> lines_;
  mutable std::array<std::vector<cplx>, kEdges> out_;
};

/// e^{-iHt} Psi for the star graph with the given vertex coupling.
GraphField apply_linear_propagator(const VertexCoupling& coupling, double t, const GraphField& psi);

/// e^{-iH_j t} Psi, j in {1, 2, 3}.
GraphField apply_two_edge_propagator(int j, double t, const GraphField& psi);

struct DecayProbe {
  std::vector<double> times;
  std::vector<double> sup_norms;
  double slope = 0.0;  // least-squares slope of log sup vs log t
};

/// Samples ||e^{-iHt} Psi0||_inf at each time and fits a power law.
DecayProbe dispersive_decay_probe(const VertexCoupling& coupling, const GraphField& psi0,
                                  std::span<const double> times);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace stargraph
