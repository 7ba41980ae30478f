#pragma once

// Cross-check of the closed form, the grid solver, the direct propagator and
// the two transmission quadratures for one parameter set.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cgp/delta_closed_form.hpp"
#include "cgp/errors.hpp"
#include "cgp/gaussian_packet.hpp"
#include "cgp/tdse_oracle.hpp"
#include "cgp/transmission.hpp"

namespace cgp {

struct VerifyOptions {
  double kdx = 0.1;        // transmission run resolution
  double l2_kdx = 0.01;    // wavefunction comparison run resolution
  double residual_tol = 1e-4;
  std::optional<std::size_t> n_points;  // overrides the transmission grid size
  double rel_tol = default_rel_tol;

  double tol_identity = 1e-8;
  double tol_transmission = 2e-3;
  double tol_l2 = 1e-3;
  double tol_norm_drift = 1e-9;
  double tol_direct = 1e-3;
  double max_kdx = 0.5;
  std::size_t min_points = 1u << 12;
};

struct VerifyRow {
  std::string quantity;
  double value = 0.0;
  double reference = 0.0;
  double delta = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct VerifyReport {
  PacketSpec packet;
  BarrierSpec barrier;
  DimensionlessPoint point;
  std::vector<VerifyRow> rows;

  [[nodiscard]] bool all_pass() const {
    for (const auto& r : rows) {
      if (!r.pass) return false;
    }
    return !rows.empty();
  }
};

namespace detail {

inline VerifyRow compare(std::string name, double value, double reference, double tol,
                         std::string note = {}) {
  const double delta = std::abs(value - reference);
  return {std::move(name), value, reference, delta, tol, delta <= tol, std::move(note)};
}

inline VerifyRow failed(std::string name, std::string note) {
  VerifyRow r;
  r.quantity = std::move(name);
  r.value = std::nan("");
  r.reference = std::nan("");
  r.delta = std::nan("");
  r.pass = false;
  r.note = std::move(note);
  return r;
}

// ||psi_grid - psi_closed|| / ||psi_closed|| over the grid nodes.
inline double relative_l2_to_closed_form(const WavefunctionGrid& g, const PacketSpec& spec,
                                         const BarrierSpec& barrier) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx ref = evolved_wavefunction(spec, barrier, g.x[i], g.t);
    num += std::norm(g.psi[i] - ref);
    den += std::norm(ref);
  }
  return std::sqrt(num / den);
}

inline double closed_form_left_probability(const WavefunctionGrid& g, const PacketSpec& spec,
                                           const BarrierSpec& barrier) {
  WavefunctionGrid cf = g;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cf.psi[i] = evolved_wavefunction(spec, barrier, g.x[i], g.t);
  }
  return cf.norm_left();
}

}  // namespace detail

/// Runs every oracle comparison for one parameter set. Input validation
/// failures propagate as domain_error; numerical failures inside individual
/// checks are reported as failing rows.
inline VerifyReport run_verification(const PacketSpec& spec, const BarrierSpec& barrier,
                                     const VerifyOptions& opts = {}) {
  validate(spec, FarFieldGuard{});
  validate(barrier);
  detail::validate_rel_tol(opts.rel_tol);

  VerifyReport rep;
  rep.packet = spec;
  rep.barrier = barrier;
  rep.point = point_from_physical(spec, barrier);

  // Transmission quadratures.
  const auto T = transmission_T(rep.point, opts.rel_tol);
  const auto T_mom = momentum_average_T(rep.point, opts.rel_tol);
  rep.rows.push_back(detail::compare("T quadrature vs momentum average", T.value, T_mom.value,
                                     opts.tol_identity));

  // Long run for the transmitted probability.
  AutoConfigOptions plan_opts;
  plan_opts.kdx = opts.kdx;
  plan_opts.residual_tol = opts.residual_tol;
  plan_opts.min_points = opts.min_points;
  auto plan = plan_transmission_run(spec, barrier, plan_opts);
  SolverConfig cfg = plan.config;
  if (opts.n_points) cfg = with_points(cfg, *opts.n_points);

  const double k_dx = tracked_momentum(spec, plan_opts) * cfg.dx();
  {
    VerifyRow r = detail::compare("grid resolution k_max*dx", k_dx, 0.0, opts.max_kdx);
    if (!r.pass) {
      r.note = "under-resolved grid: results are not converged; increase --n";
    }
    rep.rows.push_back(r);
  }
  if (cfg.n_points < opts.min_points) {
    VerifyRow r;
    r.quantity = "grid size";
    r.value = static_cast<double>(cfg.n_points);
    r.reference = static_cast<double>(opts.min_points);
    r.delta = r.reference - r.value;
    r.pass = false;
    r.note = "fewer than " + std::to_string(opts.min_points) + " points: convergence not assured";
    rep.rows.push_back(r);
  }

  try {
    const auto out = evolve_numeric(spec, barrier, cfg);
    // Components slower than p_cut may still be on their way; their
    // transmission weight is bounded by residual_bound and widens the band.
    rep.rows.push_back(detail::compare(
        "TDSE transmitted vs T", out.transmitted, T.value,
        opts.tol_transmission + plan.residual_bound,
        "t_final=" + std::to_string(cfg.t_final) + ", tolerance includes in-flight bound " +
            std::to_string(plan.residual_bound)));
    rep.rows.push_back(detail::compare("TDSE norm drift", out.norm_drift, 0.0, opts.tol_norm_drift));
    rep.rows.push_back(detail::compare("closed form transmitted vs TDSE",
                                       detail::closed_form_left_probability(out.final_state, spec,
                                                                            barrier),
                                       out.transmitted, opts.tol_transmission));
  } catch (const numeric_error& e) {
    rep.rows.push_back(detail::failed("TDSE transmitted vs T", e.what()));
  }

  // Short fine run for the wavefunction itself, compared when the packet
  // centre reaches the barrier and once more after the same interval.
  const double t_hit = spec.x_c / spec.p0;
  AutoConfigOptions fine_opts;
  fine_opts.kdx = opts.l2_kdx;
  fine_opts.min_points = opts.min_points;
  SolverConfig fine = plan_fixed_time_run(spec, 2.0 * t_hit, fine_opts);
  fine.snapshot_times = {t_hit};
  try {
    const auto out = evolve_numeric(spec, barrier, fine);
    const auto& mid = out.snapshots.front();
    rep.rows.push_back(detail::compare("wavefunction L2 at barrier arrival",
                                       detail::relative_l2_to_closed_form(mid, spec, barrier), 0.0,
                                       opts.tol_l2, "t=" + std::to_string(mid.t)));
    rep.rows.push_back(detail::compare(
        "wavefunction L2 after crossing",
        detail::relative_l2_to_closed_form(out.final_state, spec, barrier), 0.0, opts.tol_l2,
        "t=" + std::to_string(out.final_state.t)));
  } catch (const numeric_error& e) {
    rep.rows.push_back(detail::failed("wavefunction L2", e.what()));
  }

  // Direct propagator quadrature at the transmitted peak after crossing.
  try {
    const double t = 2.0 * t_hit;
    const double x = -spec.x_c;
    const cplx direct = propagator_direct(spec, barrier, x, t);
    const cplx closed = evolved_wavefunction(spec, barrier, x, t);
    const double rel = std::abs(direct - closed) / std::abs(closed);
    rep.rows.push_back(detail::compare("direct propagator vs closed form (relative)", rel, 0.0,
                                       opts.tol_direct,
                                       "x=" + std::to_string(x) + ", t=" + std::to_string(t)));
  } catch (const numeric_error& e) {
    rep.rows.push_back(detail::failed("direct propagator vs closed form (relative)", e.what()));
  }
  return rep;
}

}  // namespace cgp
