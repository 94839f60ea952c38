#pragma once

#include <sstream>
#include <vector>

#include "fgge/calib/analysis.hpp"
#include "fgge/calib/context.hpp"

namespace fgge::calib {

struct RabiCalibration {
  double amplitude = 0.0;
  double carrier = 0.0;
  double g = 0.0;  // half the fitted oscillation frequency, rad/s
  double g_error = 0.0;
  double decay = 0.0;  // 1/s
  double decay_error = 0.0;
  std::vector<double> plateaus;
  std::vector<double> p_e_b;
  std::vector<double> p_f_b;
  numerics::FitResult fit;
};

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  return v;
}

inline Experiment fgge_experiment(double A, double omega, double carrier, double plateau,
                                  std::vector<Rotation> before = {}, std::vector<Rotation> after = {}) {
  Experiment e;
  e.before = std::move(before);
  e.after = std::move(after);
  pulse::FlatTopPulse p;
  p.amplitude = A;
  p.omega = omega;
  p.carrier = carrier;
  p.plateau = plateau;
  e.pulses.add(0.0, p);
  return e;
}

// From |g,e>, sweep the plateau of a resonant fg-ge pulse and fit the e
// population of B to a damped sinusoid; g is half its angular frequency.
inline RabiCalibration rabi_calibration(CalibrationContext& ctx, double A, double carrier, std::vector<double> plateaus = {}) {
  if (!(A > 0.0)) throw ConfigError("rabi_calibration: amplitude must be positive");
  const auto m = ctx.model_for(A);
  const double g_hint = m->fgge_table()->g_at(1.0);
  if (plateaus.empty()) plateaus = linear_grid(0.0, 3.0 * units::pi / g_hint, 61);
  RabiCalibration r;
  r.amplitude = A;
  r.carrier = carrier;
  const double omega = ctx.omega_from_amplitude(A);
  std::ostringstream trace;
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<Experiment> batch;
    for (double t : plateaus) batch.push_back(fgge_experiment(A, omega, carrier, t, {{Transmon::B, Transition::GE, units::pi, 0.0}}));
    const auto pops = ctx.measure(*m, batch);
    r.plateaus = plateaus;
    r.p_e_b.clear();
    r.p_f_b.clear();
    for (const auto& q : pops) {
      r.p_e_b.push_back(q.b[1]);
      r.p_f_b.push_back(q.b[2]);
    }
    std::vector<double> x;
    for (double t : plateaus) x.push_back(units::to_ns(t));
    r.fit = fit_damped_sine(x, r.p_e_b, 2.0 * g_hint * 1e-9);
    const double w = std::abs(r.fit.params[3]) * 1e9;
    const double periods = w * (plateaus.back() - plateaus.front()) / units::two_pi;
    if (periods >= 2.0 && r.fit.ok(0.9)) {
      r.g = 0.5 * w;
      r.g_error = 0.5 * r.fit.std_error(3) * 1e9;
      r.decay = r.fit.params[2] * 1e9;
      r.decay_error = r.fit.std_error(2) * 1e9;
      return r;
    }
    trace << " periods=" << periods << " R2=" << r.fit.r_squared;
    for (double& t : plateaus) t *= 2.0;
  }
  throw NumericalError("rabi_calibration: fewer than two periods resolved after extending the grid;" + trace.str());
}

inline nlohmann::json to_json(const RabiCalibration& r) {
  return {{"amplitude", r.amplitude},
          {"carrier_GHz", units::to_ghz(r.carrier)},
          {"g_MHz", units::to_mhz(r.g)},
          {"g_error_MHz", units::to_mhz(r.g_error)},
          {"decay_per_us", r.decay * 1e-6},
          {"decay_error_per_us", r.decay_error * 1e-6},
          {"fit", fit_to_json(r.fit, {"offset", "amplitude", "decay_per_ns", "omega_rad_per_ns", "phase"})}};
}

}  // namespace fgge::calib
