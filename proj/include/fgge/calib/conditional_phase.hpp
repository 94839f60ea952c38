#pragma once

#include <sstream>
#include <vector>

#include "fgge/calib/analysis.hpp"
#include "fgge/calib/chevron.hpp"
#include "fgge/calib/context.hpp"
#include "fgge/calib/ramsey.hpp"
#include "fgge/numerics/roots.hpp"

namespace fgge::calib {

struct ConditionalPhasePoint {
  double detuning = 0.0;
  double plateau = 0.0;  // tau*(detuning)
  double phase_g = 0.0;  // B Ramsey phase with A in g
  double phase_e = 0.0;  // with A in e
  double phi_c = 0.0;    // phase_e - phase_g, (-pi, pi]
};

struct ConditionalPhaseScan {
  double amplitude = 0.0;
  double carrier = 0.0;
  std::vector<ConditionalPhasePoint> points;
  std::vector<double> phi_c_unwrapped;
  double delta_pi = 0.0;
  double delta_pi_error = 0.0;
  double slope = 0.0;  // rad per rad/s
  double fit_max_residual = 0.0;
  int fit_points = 0;
};

// Plateau bracket for tau* from the table coupling and edge area.
inline std::pair<double, double> recovery_bracket(CalibrationContext& ctx, double A, double carrier) {
  const auto m = ctx.model_for(A);
  const auto& t = *m->fgge_table();
  pulse::FlatTopPulse p;
  p.omega = ctx.omega_from_amplitude(A);
  p.carrier = carrier;
  const double tau0 = std::max(units::ns(5.0), units::pi / t.g_at(1.0) - plateau_equivalent_edges(p, t));
  return {0.6 * tau0, 1.4 * tau0};
}

inline ConditionalPhasePoint conditional_phase_point(CalibrationContext& ctx, double A, double carrier, double detuning,
                                                     double plateau = -1.0) {
  const auto m = ctx.model_for(A);
  ConditionalPhasePoint r;
  r.detuning = detuning;
  if (plateau < 0.0) {
    const auto [lo, hi] = recovery_bracket(ctx, A, carrier + detuning);
    plateau = recovery_time(ctx, A, carrier + detuning, lo, hi).x;
  }
  r.plateau = plateau;
  const auto e = fgge_experiment(A, ctx.omega_from_amplitude(A), carrier + detuning, plateau);
  r.phase_g = ramsey_phase(ctx, *m, Transmon::B, false, e.pulses).phase;
  r.phase_e = ramsey_phase(ctx, *m, Transmon::B, true, e.pulses).phase;
  r.phi_c = wrap_phase(r.phase_e - r.phase_g);
  return r;
}

// phi_c over the detuning grid, unwrapped along the grid, and the detuning
// where it crosses an odd multiple of pi from a local linear fit within
// `window` of the crossing.
inline ConditionalPhaseScan conditional_phase_vs_detuning(CalibrationContext& ctx, double A, double carrier,
                                                          const std::vector<double>& detunings,
                                                          const std::vector<double>& plateaus = {},
                                                          double window = units::mhz(0.6)) {
  if (detunings.size() < 2) throw ConfigError("conditional_phase_vs_detuning: need at least two detunings");
  if (!plateaus.empty() && plateaus.size() != detunings.size())
    throw ConfigError("conditional_phase_vs_detuning: plateau list does not match the detuning grid");
  ConditionalPhaseScan r;
  r.amplitude = A;
  r.carrier = carrier;
  std::vector<double> wrapped;
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    r.points.push_back(conditional_phase_point(ctx, A, carrier, detunings[i], plateaus.empty() ? -1.0 : plateaus[i]));
    wrapped.push_back(r.points.back().phi_c);
  }
  r.phi_c_unwrapped = unwrap(wrapped);
  const auto& y = r.phi_c_unwrapped;
  std::size_t cross = y.size();
  double target = 0.0;
  for (std::size_t i = 0; i + 1 < y.size() && cross == y.size(); ++i) {
    const double k = std::floor((std::min(y[i], y[i + 1]) + units::pi) / units::two_pi);
    const double odd = (2.0 * k + 1.0) * units::pi;
    if ((y[i] - odd) * (y[i + 1] - odd) <= 0.0 && std::max(y[i], y[i + 1]) >= odd) {
      cross = i;
      target = odd;
    }
  }
  if (cross == y.size()) throw NumericalError("conditional_phase_vs_detuning: no pi crossing in grid; extend the detuning grid");
  const double guess = detunings[cross] + (target - y[cross]) * (detunings[cross + 1] - detunings[cross]) / (y[cross + 1] - y[cross]);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(detunings[i] - guess) <= window || i == cross || i == cross + 1) {
      xs.push_back(units::to_mhz(detunings[i]));
      ys.push_back(y[i]);
    }
  const auto line = fit_line(xs, ys);
  r.delta_pi = units::mhz(line.solve(target));
  r.delta_pi_error = units::mhz(line.solve_error(target));
  r.slope = line.slope / units::mhz(1.0);
  r.fit_max_residual = line.max_residual;
  r.fit_points = static_cast<int>(xs.size());
  return r;
}

// Brent refinement of phi_c(Delta) = pi around a first estimate.
inline double refine_delta_pi(CalibrationContext& ctx, double A, double carrier, double guess,
                              double half_width = units::mhz(0.25)) {
  auto f = [&](double d) { return wrap_phase(conditional_phase_point(ctx, A, carrier, d).phi_c - units::pi); };
  const double a = guess - half_width, b = guess + half_width;
  const double fa = f(a), fb = f(b);
  if ((fa > 0.0) == (fb > 0.0) || std::abs(fa) > 0.5 * units::pi || std::abs(fb) > 0.5 * units::pi) return guess;
  return numerics::root_find_scalar(f, a, b, units::khz(1e-3)).x;
}

inline nlohmann::json to_json(const ConditionalPhaseScan& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    pts.push_back({{"detuning_MHz", units::to_mhz(p.detuning)},
                   {"tau_star_ns", units::to_ns(p.plateau)},
                   {"phi_c_rad", p.phi_c},
                   {"phi_c_unwrapped_rad", r.phi_c_unwrapped[i]},
                   {"winding", static_cast<int>(std::lround((r.phi_c_unwrapped[i] - p.phi_c) / units::two_pi))}});
  }
  return {{"amplitude", r.amplitude},
          {"carrier_GHz", units::to_ghz(r.carrier)},
          {"delta_pi_MHz", units::to_mhz(r.delta_pi)},
          {"delta_pi_error_MHz", units::to_mhz(r.delta_pi_error)},
          {"slope_deg_per_MHz", units::to_deg(r.slope * units::mhz(1.0))},
          {"fit_max_residual_deg", units::to_deg(r.fit_max_residual)},
          {"fit_points", r.fit_points},
          {"points", pts}};
}

}  // namespace fgge::calib
