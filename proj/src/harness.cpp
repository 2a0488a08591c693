#include "stargraph/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "stargraph/error.hpp"
#include "stargraph/fft.hpp"
#include "stargraph/propagator.hpp"

namespace stargraph {

void ExperimentConfig::validate() const {
  require(v > 1.0 && std::isfinite(v), "experiment needs v > 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(T > 0.0 && std::isfinite(T), "T must be positive");
  if (coupling == CouplingKind::delta) require(coupling_parameter >= 0.0, "alpha~ must be non-negative");
  if (coupling == CouplingKind::delta_prime) require(coupling_parameter > 0.0, "beta~ must be positive");
  if (x0) require(*x0 >= minimal_x0(v, delta) * (1.0 - 1e-12), "x0 must be at least v^{1-delta}");
  if (dx) require(*dx > 0.0, "dx must be positive");
  if (dt) require(*dt > 0.0, "dt must be positive");
  if (edge_length) require(*edge_length > 0.0, "edge length must be positive");
  require(margin >= 0.0, "margin must be non-negative");
  require(phase3_snapshots >= 1, "need at least one phase-3 snapshot");
  require(ratio_offset > 0.0, "ratio offset must be positive");
  require(incoming_edge < kEdges, "incoming edge must be 0, 1 or 2");
  require(far_end_mass_threshold > 0.0 && far_end_mass_threshold < 1.0, "far-end threshold must lie in (0, 1)");
  require(check_interval >= 1, "check interval must be at least one step");
}

double ExperimentConfig::resolved_x0() const { return x0 ? *x0 : minimal_x0(v, delta); }

double ExperimentConfig::resolved_dx() const {
  return dx ? *dx : std::min(0.05, std::numbers::pi / (4.0 * v));
}

double ExperimentConfig::resolved_dt() const {
  if (dt) return *dt;
  const double h = resolved_dx();
  // grid-scale modes pick up k^2 dt per step; past ~2pi the splitting
  // feeds them at the vertex and they outrun any edge length
  return std::min(h / std::max(4.0, v), 0.5 * h * h);
}

PhaseSchedule ExperimentConfig::schedule() const { return phase_schedule(resolved_x0(), v, delta, T); }

double ExperimentConfig::horizon() const {
  const PhaseSchedule s = schedule();
  return std::max(s.t3, s.t2 + ratio_offset);
}

double spectral_speed_bound(std::span<const cplx> samples, double dx, double tolerance) {
  require(dx > 0.0 && tolerance > 0.0, "speed bound needs dx > 0 and a positive tolerance");
  const std::size_t n = good_fft_size(2 * samples.size());
  std::vector<cplx> buf(n, cplx{});
  std::copy(samples.begin(), samples.end(), buf.begin());
  FftPlan::get(n).forward(buf.data());
  // Parseval: mass = dx / n * sum |F_k|^2
  std::vector<std::pair<double, double>> spectrum(n);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  const auto nn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const double k = std::abs(dk * static_cast<double>(i < (nn + 1) / 2 ? i : i - nn));
    spectrum[static_cast<std::size_t>(i)] = {k, std::norm(buf[static_cast<std::size_t>(i)]) * dx / static_cast<double>(n)};
  }
  std::sort(spectrum.begin(), spectrum.end());
  double above = 0.0;
  for (std::size_t i = spectrum.size(); i-- > 0;) {
    if (above + spectrum[i].second > tolerance) return 2.0 * spectrum[i].first;
    above += spectrum[i].second;
  }
  return 0.0;
}

double ExperimentConfig::resolved_edge_length() const {
  if (edge_length) return *edge_length;
  const double x = resolved_x0();
  const double h = resolved_dx();
  const GridSpec probe = GridSpec::from_length(x + 40.0, h);
  const GraphField datum = initial_datum(x, v, delta, probe);
  const double speed = std::max(v, spectral_speed_bound(datum[0], h, 0.1 * far_end_mass_threshold));
  return std::max(x + 12.0, speed * horizon()) + margin;
}

GridSpec ExperimentConfig::grid() const { return GridSpec::from_length(resolved_edge_length(), resolved_dx()); }

VertexCoupling ExperimentConfig::physical_coupling() const { return rescaled_coupling(coupling, coupling_parameter, v); }

RescaledCoefficients ExperimentConfig::coefficients() const { return rescaled_coefficients(coupling, coupling_parameter, v); }

std::array<double, kEdges> permute(const std::array<double, kEdges>& in, std::size_t incoming_edge) {
  std::array<double, kEdges> out{};
  for (std::size_t j = 0; j < kEdges; ++j) out[(j + incoming_edge) % kEdges] = in[j];
  return out;
}

namespace {

SnapshotMetrics measure(double t, const GraphField& psi) {
  SnapshotMetrics s;
  s.t = t;
  std::array<double, kEdges> em{};
  for (std::size_t j = 0; j < kEdges; ++j) em[j] = edge_mass(psi, j);
  s.mass = em[0] + em[1] + em[2];
  for (std::size_t j = 0; j < kEdges; ++j) s.ratio[j] = s.mass > 0.0 ? std::sqrt(em[j] / s.mass) : 0.0;
  return s;
}

enum class Mark { t1, t2, phase3, ratio };

struct Stop {
  double t;
  std::vector<Mark> marks;
};

}  // namespace

ExperimentReport run_scattering_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport rep;
  rep.config = config;
  rep.schedule = config.schedule();
  rep.coeffs = config.coefficients();
  rep.grid = config.grid();
  rep.dt = config.resolved_dt();
  rep.x0 = config.resolved_x0();
  const auto& s = rep.schedule;
  const std::size_t in = config.incoming_edge;

  // snapshot times, merged
  std::vector<Stop> stops;
  auto add = [&](double t, Mark m) {
    for (auto& st : stops)
      if (std::abs(st.t - t) <= 1e-12 * std::max(1.0, t)) {
        st.marks.push_back(m);
        return;
      }
    stops.push_back({t, {m}});
  };
  add(std::max(0.0, s.t1), Mark::t1);
  add(s.t2, Mark::t2);
  const std::size_t K = config.phase3_snapshots;
  const double span = s.t3 - s.t2;
  for (std::size_t k = 0; k < K; ++k) {
    const double frac = K == 1 ? 1.0 : std::pow(2.0, -5.0 * static_cast<double>(K - 1 - k) / static_cast<double>(K - 1));
    add(s.t2 + span * frac, Mark::phase3);
  }
  add(s.t2 + config.ratio_offset, Mark::ratio);
  std::sort(stops.begin(), stops.end(), [](const Stop& a, const Stop& b) { return a.t < b.t; });

  EvolveConfig ec;
  ec.dt = rep.dt;
  ec.scheme = config.scheme;
  ec.coupling = config.physical_coupling();
  ec.matched_wavenumber = 0.5 * config.v;
  ec.conservation_check_interval = config.check_interval;
  ec.far_end_mass_threshold = config.far_end_mass_threshold;

  LineEvolveConfig lc;
  lc.dt = rep.dt;
  lc.rim_mass_threshold = config.far_end_mass_threshold;
  lc.check_interval = config.check_interval;

  GraphField psi = initial_datum(rep.x0, config.v, config.delta, rep.grid, in);
  std::optional<ReferenceBundle> ref;
  double t = 0.0;
  bool first = true;
  for (const auto& st : stops) {
    EvolveResult seg = evolve(psi, t, st.t, ec);
    rep.steps += seg.steps;
    if (first) {
      rep.trace = seg.trace;
      first = false;
    } else {
      rep.trace.append(seg.trace);
    }
    psi = std::move(seg.field);
    t = st.t;

    const bool needs_ref = std::any_of(st.marks.begin(), st.marks.end(), [](Mark m) { return m == Mark::phase3 || m == Mark::ratio; });
    if (needs_ref && st.t >= s.t2) {
      if (!ref) ref = outgoing_profiles_at_t2(rep.coeffs, s, rep.grid, rep.grid.length() + 2.0 * rep.grid.dx, in);
      ref = advance_reference(*ref, st.t, lc);
      rep.line_rim_mass_max = std::max({rep.line_rim_mass_max, ref->phi_ref.rim_mass(lc.rim_fraction),
                                        ref->phi_tr.rim_mass(lc.rim_fraction)});
    }

    for (Mark m : st.marks) {
      switch (m) {
        case Mark::t1:
          rep.e1 = l2_distance(psi, truth_soliton(rep.x0, config.v, st.t, rep.grid, in));
          break;
        case Mark::t2: {
          const Superposition sup = phase2_superposition(rep.x0, config.v, rep.coeffs, st.t, rep.grid, in);
          rep.e2 = l2_distance(psi, sup.outgoing);
          rep.e2_superposition = l2_distance(psi, sup.total());
          break;
        }
        case Mark::phase3: {
          SnapshotMetrics snap = measure(st.t, psi);
          snap.mismatch = l2_distance(psi, ref->sum(rep.grid));
          rep.phase3.push_back(snap);
          rep.e3_sup = std::max(rep.e3_sup, snap.mismatch);
          break;
        }
        case Mark::ratio: {
          rep.at_ratio_time = measure(st.t, psi);
          rep.at_ratio_time.mismatch = l2_distance(psi, ref->sum(rep.grid));
          double closure = 0.0;
          for (std::size_t j = 0; j < kEdges; ++j) closure += edge_mass(psi, j);
          rep.mass_closure = std::abs(closure - mass(psi)) / mass(psi);
          break;
        }
      }
    }
  }

  rep.expected_ratio = permute({std::abs(rep.coeffs.r), std::abs(rep.coeffs.t), std::abs(rep.coeffs.t)}, in);
  for (std::size_t j = 0; j < kEdges; ++j) {
    rep.ratio_error[j] = std::abs(rep.at_ratio_time.ratio[j] - rep.expected_ratio[j]);
    rep.ratio_error_max = std::max(rep.ratio_error_max, rep.ratio_error[j]);
  }
  rep.mass_drift = rep.trace.max_abs_mass_drift();
  rep.energy_drift = rep.trace.max_abs_energy_drift();
  rep.mass_drift_final = rep.trace.mass.empty() ? 0.0 : std::abs(rep.trace.mass_drift().back());
  for (double f : rep.trace.far_end_mass) rep.far_end_mass_max = std::max(rep.far_end_mass_max, f);
  rep.final_state = std::move(psi);
  if (ref) rep.reference_final = ref->fields(rep.grid);
  return rep;
}

// ---------------------------------------------------------------------------

std::string CouplingChoice::name() const {
  std::ostringstream o;
  o << to_string(kind);
  if (kind != CouplingKind::kirchhoff) o << '(' << parameter << ')';
  return o.str();
}

double fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return loglog_slope(xs, ys);
}

SweepResult run_sweep(const ExperimentConfig& base, const std::vector<double>& v_list,
                      const std::vector<CouplingChoice>& couplings, std::size_t workers) {
  require(std::is_sorted(v_list.begin(), v_list.end()) &&
              std::adjacent_find(v_list.begin(), v_list.end()) == v_list.end(),
          "v list must be strictly increasing");
  require(couplings.empty() || v_list.size() >= 3, "a sweep needs at least three velocities");
  SweepResult result;
  for (const auto& c : couplings)
    for (double v : v_list) {
      SweepRow row;
      row.v = v;
      row.coupling = c;
      result.rows.push_back(row);
    }

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < result.rows.size(); i = next++) {
      SweepRow& row = result.rows[i];
      try {
        ExperimentConfig cfg = base;
        cfg.v = row.v;
        cfg.coupling = row.coupling.kind;
        cfg.coupling_parameter = row.coupling.parameter;
        // per-v defaults unless the base pins them
        const ExperimentReport rep = run_scattering_experiment(cfg);
        row.ok = true;
        row.e1 = rep.e1;
        row.e2 = rep.e2;
        row.e3_sup = rep.e3_sup;
        row.ratio_error = rep.ratio_error;
        row.ratio_error_max = rep.ratio_error_max;
        row.mass_drift = rep.mass_drift;
        row.energy_drift = rep.energy_drift;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, result.rows.size()));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (const auto& c : couplings) {
    SweepSlopes sl;
    sl.coupling = c;
    std::vector<double> v, e1, e2, e3, re;
    for (const auto& row : result.rows) {
      if (row.coupling.kind != c.kind || row.coupling.parameter != c.parameter || !row.ok) continue;
      v.push_back(row.v);
      e1.push_back(row.e1);
      e2.push_back(row.e2);
      e3.push_back(row.e3_sup);
      re.push_back(row.ratio_error_max);
    }
    sl.points = v.size();
    sl.e1 = fit_loglog(v, e1);
    sl.e2 = fit_loglog(v, e2);
    sl.e3_sup = fit_loglog(v, e3);
    sl.ratio_error = fit_loglog(v, re);
    sl.e2_matches_minus_half_delta = std::isfinite(sl.e2) && std::abs(sl.e2 + 0.5 * base.delta) <= 0.3;
    sl.e3_negative = std::isfinite(sl.e3_sup) && sl.e3_sup < 0.0;
    result.slopes.push_back(sl);
  }
  return result;
}

void SweepResult::write_csv(std::ostream& out) const {
  out << "v,coupling,parameter,status,e1,e2,e3_sup,ratio_err_edge1,ratio_err_edge2,ratio_err_edge3,ratio_err_max,"
         "mass_drift,energy_drift,error\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << r.v << ',' << to_string(r.coupling.kind) << ',' << r.coupling.parameter << ',' << (r.ok ? "ok" : "failed")
        << ',' << r.e1 << ',' << r.e2 << ',' << r.e3_sup << ',' << r.ratio_error[0] << ',' << r.ratio_error[1] << ','
        << r.ratio_error[2] << ',' << r.ratio_error_max << ',' << r.mass_drift << ',' << r.energy_drift << ',' << err
        << '\n';
  }
}

void SweepResult::write_slopes_csv(std::ostream& out) const {
  out << "coupling,parameter,points,slope_e1,slope_e2,slope_e3_sup,slope_ratio_err,e2_matches_minus_half_delta,"
         "e3_negative\n";
  out << std::setprecision(12);
  for (const auto& s : slopes) {
    out << to_string(s.coupling.kind) << ',' << s.coupling.parameter << ',' << s.points << ',' << s.e1 << ',' << s.e2
        << ',' << s.e3_sup << ',' << s.ratio_error << ',' << (s.e2_matches_minus_half_delta ? 1 : 0) << ','
        << (s.e3_negative ? 1 : 0) << '\n';
  }
}

}  // namespace stargraph
