#pragma once

#include <vector>

#include "fgge/calib/analysis.hpp"
#include "fgge/calib/context.hpp"
#include "fgge/calib/rabi.hpp"

namespace fgge::calib {

inline Transmon other(Transmon q) { return q == Transmon::A ? Transmon::B : Transmon::A; }

// Ramsey phase of `target` across `sched`, with the other transmon prepared
// in e when `control_excited`. The analysis pulse axis is swept and
// P_e = (1 + cos(theta - phi)) / 2 is fitted linearly; theta is the phase of
// the target's e amplitude relative to g.
struct RamseyPhase {
  double phase = 0.0;  // (-pi, pi]
  double contrast = 0.0;
  std::vector<double> axes;
  std::vector<double> p_e;
};

inline RamseyPhase ramsey_phase(CalibrationContext& ctx, const pulse::RotatingFrameModel& m, Transmon target,
                                bool control_excited, const pulse::PulseSchedule& sched, int points = 8) {
  if (points < 3) throw ConfigError("ramsey_phase: need at least three analysis phases");
  std::vector<Experiment> batch;
  RamseyPhase r;
  for (int k = 0; k < points; ++k) {
    const double phi = units::two_pi * k / points;
    Experiment e;
    if (control_excited) e.before.push_back({other(target), Transition::GE, units::pi, 0.0});
    e.before.push_back({target, Transition::GE, 0.5 * units::pi, 0.0});
    e.pulses = sched;
    e.after.push_back({target, Transition::GE, 0.5 * units::pi, phi});
    batch.push_back(std::move(e));
    r.axes.push_back(phi);
  }
  for (const auto& q : ctx.measure(m, batch)) r.p_e.push_back(q.of(target)[1]);
  const auto s = fit_sinusoid_fixed(r.axes, r.p_e, 1.0);
  r.phase = wrap_phase(std::atan2(s.sin_coef, s.cos_coef));
  r.contrast = 2.0 * std::hypot(s.cos_coef, s.sin_coef);
  return r;
}

struct DispersiveShift {
  double chi = 0.0;  // rad/s
  double chi_error = 0.0;
  double frequency_g = 0.0;  // fringe frequency with A in g
  double frequency_e = 0.0;
  double artificial_detuning = 0.0;
  std::vector<double> waits;
  std::vector<double> p_e_g;
  std::vector<double> p_e_e;
};

// Ramsey on B with A in g and in e, no fg-ge drive. The analysis axis
// advances at an artificial detuning so both fringes oscillate; chi is the
// difference of the fitted fringe frequencies.
inline DispersiveShift measure_dispersive_shift(CalibrationContext& ctx, double span = units::us(2.0), int points = 101,
                                                double artificial = units::mhz(4.0)) {
  if (!(span > 0.0) || points < 10) throw ConfigError("measure_dispersive_shift: insufficient Ramsey evolution span");
  const auto& m = ctx.bare_model();
  DispersiveShift r;
  r.artificial_detuning = artificial;
  r.waits = linear_grid(0.0, span, points);
  std::vector<double> x;
  for (double t : r.waits) x.push_back(units::to_ns(t));
  double freq[2], err[2];
  for (int a = 0; a < 2; ++a) {
    std::vector<Experiment> batch;
    for (double t : r.waits) {
      Experiment e;
      if (a == 1) e.before.push_back({Transmon::A, Transition::GE, units::pi, 0.0});
      e.before.push_back({Transmon::B, Transition::GE, 0.5 * units::pi, 0.0});
      e.pulses.wait(t);
      e.after.push_back({Transmon::B, Transition::GE, 0.5 * units::pi, artificial * t});
      e.dt = units::ns(1.0);
      batch.push_back(std::move(e));
    }
    auto& y = a == 0 ? r.p_e_g : r.p_e_e;
    for (const auto& q : ctx.measure(m, batch)) y.push_back(q.b[1]);
    const auto fit = fit_damped_sine(x, y, artificial * 1e-9);
    if (!fit.ok(0.5)) throw NumericalError("measure_dispersive_shift: fringe fit failed, extend the Ramsey span");
    freq[a] = std::abs(fit.params[3]) * 1e9;
    err[a] = fit.std_error(3) * 1e9;
  }
  r.frequency_g = freq[0];
  r.frequency_e = freq[1];
  r.chi = freq[1] - freq[0];
  r.chi_error = std::hypot(err[0], err[1]);
  return r;
}

inline nlohmann::json to_json(const DispersiveShift& r) {
  return {{"chi_MHz", units::to_mhz(r.chi)},
          {"chi_error_MHz", units::to_mhz(r.chi_error)},
          {"fringe_g_MHz", units::to_mhz(r.frequency_g)},
          {"fringe_e_MHz", units::to_mhz(r.frequency_e)},
          {"artificial_detuning_MHz", units::to_mhz(r.artificial_detuning)}};
}

// Phases each transmon picks up across the gate with the other in g.
struct SingleQubitPhases {
  double phi_a = 0.0;
  double phi_b = 0.0;
};

inline SingleQubitPhases single_qubit_phase_calibration(CalibrationContext& ctx, const pulse::RotatingFrameModel& m,
                                                        const pulse::PulseSchedule& gate) {
  return {ramsey_phase(ctx, m, Transmon::A, false, gate).phase, ramsey_phase(ctx, m, Transmon::B, false, gate).phase};
}

// Unwrapped phase of A across the gate, following the Ramsey phase as the
// fg-ge amplitude is raised from zero in `steps` increments of Omega^2.
inline double unwrapped_phase_a(CalibrationContext& ctx, const pulse::RotatingFrameModel& m,
                                const pulse::FlatTopPulse& p, int steps = 64) {
  std::vector<double> wrapped{0.0};
  for (int k = 1; k <= steps; ++k) {
    pulse::FlatTopPulse q = p;
    q.omega = p.omega * std::sqrt(static_cast<double>(k) / steps);
    pulse::PulseSchedule s;
    s.add(0.0, q);
    wrapped.push_back(ramsey_phase(ctx, m, Transmon::A, false, s, 4).phase);
  }
  return unwrap(wrapped).back();
}

}  // namespace fgge::calib
