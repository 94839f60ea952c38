#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include <json.hpp>

#include "fgge/calib/conditional_phase.hpp"
#include "fgge/calib/gate_math.hpp"
#include "fgge/calib/rabi.hpp"
#include "fgge/calib/ramsey.hpp"
#include "fgge/calib/spectroscopy.hpp"
#include "fgge/pulse/channel.hpp"

namespace fgge::calib {

// Calibrated CZ: one flat-top fg-ge pulse followed by virtual-Z corrections.
struct GateParams {
  double amplitude = 0.0;
  double omega = 0.0;     // rad/s
  double carrier = 0.0;   // rad/s, resonance + detuning
  double detuning = 0.0;  // rad/s
  double plateau = 0.0;   // s
  double sigma = units::ns(5.0);
  double vz_a = 0.0;
  double vz_b = 0.0;
  double phi_c = 0.0;

  pulse::FlatTopPulse pulse() const {
    pulse::FlatTopPulse p;
    p.amplitude = amplitude;
    p.omega = omega;
    p.carrier = carrier;
    p.plateau = plateau;
    p.sigma = sigma;
    return p;
  }
  pulse::PulseSchedule uncompensated() const {
    pulse::PulseSchedule s;
    s.add(0.0, pulse());
    return s;
  }
  pulse::PulseSchedule to_schedule() const {
    auto s = uncompensated();
    const double t = s.duration();
    s.add(t, pulse::VirtualZ{Transmon::A, vz_a});
    s.add(t, pulse::VirtualZ{Transmon::B, vz_b});
    return s;
  }
  double duration() const { return pulse().duration(); }
};

inline nlohmann::json to_json(const GateParams& g) {
  return {{"amplitude", g.amplitude},
          {"omega_MHz", units::to_mhz(g.omega)},
          {"carrier_GHz", units::to_ghz(g.carrier)},
          {"detuning_MHz", units::to_mhz(g.detuning)},
          {"plateau_ns", units::to_ns(g.plateau)},
          {"sigma_ns", units::to_ns(g.sigma)},
          {"duration_ns", units::to_ns(g.duration())},
          {"vz_a_rad", g.vz_a},
          {"vz_b_rad", g.vz_b},
          {"phi_c_rad", g.phi_c}};
}

inline GateParams gate_params_from_json(const nlohmann::json& j) {
  try {
    GateParams g;
    g.amplitude = j.at("amplitude").get<double>();
    g.omega = units::mhz(j.at("omega_MHz").get<double>());
    g.carrier = units::ghz(j.at("carrier_GHz").get<double>());
    g.detuning = units::mhz(j.value("detuning_MHz", 0.0));
    g.plateau = units::ns(j.at("plateau_ns").get<double>());
    g.sigma = units::ns(j.value("sigma_ns", 5.0));
    g.vz_a = j.value("vz_a_rad", 0.0);
    g.vz_b = j.value("vz_b_rad", 0.0);
    g.phi_c = j.value("phi_c_rad", 0.0);
    g.pulse().validate();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("gate parameters: ") + e.what());
  }
}

struct CalibrationOptions {
  double amplitude = 1.0;
  std::vector<double> detunings;  // empty: -0.5 .. 3 MHz in 0.25 MHz steps
  bool refine = true;
  bool measure_chi = true;
  // Previously calibrated gate: grids are recentred on its resonance and
  // detuning.
  std::optional<GateParams> start;
  // Spectroscopy center and Rabi coupling measured earlier; both steps are
  // then skipped.
  struct Upstream {
    double carrier = 0.0;  // rad/s
    double g = 0.0;        // rad/s
  };
  std::optional<Upstream> upstream;
};

struct CalibrationRecord {
  GateParams gate;
  bool measured_upstream = true;  // spectroscopy and rabi filled in
  StarkSpectroscopy spectroscopy;
  RabiCalibration rabi;
  ConditionalPhaseScan scan;
  std::optional<DispersiveShift> dispersive;
  double delta_pi_linear = 0.0;
  double phase_a = 0.0;  // uncompensated single-transmon phases
  double phase_b = 0.0;
  double phase_a_unwrapped = 0.0;
  double residual_a = 0.0;  // after virtual-Z compensation
  double residual_b = 0.0;
  double recovery_leak = 0.0;  // f population of A left after the gate from |g,e>
  AnalyticGate analytic;
};

inline std::vector<double> default_detuning_grid() {
  std::vector<double> d;
  for (int k = -2; k <= 12; ++k) d.push_back(units::mhz(0.25 * k));
  return d;
}

// Spectroscopy, Rabi, conditional-phase scan, tau* at the pi point,
// single-transmon phases and chi, in that order. Deterministic for a fixed
// configuration, so a second run reproduces the first.
inline CalibrationRecord run_calibration(CalibrationContext& ctx, const CalibrationOptions& opt = {}) {
  const double A = opt.amplitude;
  if (!(A > 0.0)) throw ConfigError("run_calibration: amplitude must be positive");
  CalibrationRecord r;
  std::vector<double> freqs, detunings = opt.detunings;
  if (opt.start) {
    const double g = ctx.model_for(A)->fgge_table()->g_at(1.0);
    freqs = linear_grid(opt.start->carrier - opt.start->detuning - 3.0 * g,
                        opt.start->carrier - opt.start->detuning + 3.0 * g, 41);
    if (detunings.empty())
      for (int k = -4; k <= 4; ++k) detunings.push_back(opt.start->detuning + units::mhz(0.25 * k));
  }
  if (detunings.empty()) detunings = default_detuning_grid();
  double center = 0.0, g_rabi = 0.0;
  if (opt.upstream) {
    if (!(opt.upstream->carrier > 0.0 && opt.upstream->g > 0.0))
      throw ConfigError("run_calibration: upstream carrier and coupling must be positive");
    r.measured_upstream = false;
    center = opt.upstream->carrier;
    g_rabi = opt.upstream->g;
  } else {
    r.spectroscopy = ac_stark_spectroscopy(ctx, A, freqs);
    center = r.spectroscopy.omega_fgge;
    r.rabi = rabi_calibration(ctx, A, center);
    g_rabi = r.rabi.g;
  }
  r.scan = conditional_phase_vs_detuning(ctx, A, center, detunings);
  r.delta_pi_linear = r.scan.delta_pi;
  const double delta = opt.refine ? refine_delta_pi(ctx, A, center, r.scan.delta_pi) : r.scan.delta_pi;

  GateParams& g = r.gate;
  g.amplitude = A;
  g.omega = ctx.omega_from_amplitude(A);
  g.detuning = delta;
  g.carrier = center + delta;
  const auto point = conditional_phase_point(ctx, A, center, delta);
  g.plateau = point.plateau;
  g.phi_c = point.phi_c;

  const auto m = ctx.model_for(A);
  const auto gate = g.uncompensated();
  const auto ph = single_qubit_phase_calibration(ctx, *m, gate);
  r.phase_a = ph.phi_a;
  r.phase_b = ph.phi_b;
  r.phase_a_unwrapped = unwrapped_phase_a(ctx, *m, g.pulse(), 32);
  g.vz_a = -ph.phi_a;
  g.vz_b = -ph.phi_b;
  const auto res = single_qubit_phase_calibration(ctx, *m, g.to_schedule());
  r.residual_a = res.phi_a;
  r.residual_b = res.phi_b;

  Experiment e;
  e.before.push_back({Transmon::B, Transition::GE, units::pi, 0.0});
  e.pulses = gate;
  r.recovery_leak = qutrit_populations(*m, ctx.run(*m, e)).a[2];

  if (opt.measure_chi) r.dispersive = measure_dispersive_shift(ctx);
  const double chi = r.dispersive ? r.dispersive->chi : 0.0;
  r.analytic = analytic_gate_math(g_rabi, delta, chi);
  return r;
}

inline nlohmann::json to_json(const CalibrationRecord& r) {
  nlohmann::json j{{"gate", to_json(r.gate)},
                   {"conditional_phase", to_json(r.scan)},
                   {"delta_pi_linear_MHz", units::to_mhz(r.delta_pi_linear)},
                   {"phase_a_deg", units::to_deg(r.phase_a)},
                   {"phase_b_deg", units::to_deg(r.phase_b)},
                   {"phase_a_unwrapped_deg", units::to_deg(r.phase_a_unwrapped)},
                   {"residual_a_deg", units::to_deg(r.residual_a)},
                   {"residual_b_deg", units::to_deg(r.residual_b)},
                   {"recovery", 1.0 - r.recovery_leak},
                   {"analytic",
                    {{"t_g_ns", units::to_ns(r.analytic.t_g)},
                     {"phi_fgge_rad", r.analytic.phi_fgge},
                     {"phi_zz_rad", r.analytic.phi_zz},
                     {"condition_rad", r.analytic.condition}}}};
  if (r.measured_upstream) {
    j["spectroscopy"] = to_json(r.spectroscopy);
    j["rabi"] = to_json(r.rabi);
  }
  if (r.dispersive) j["dispersive"] = to_json(*r.dispersive);
  return j;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace fgge::calib
