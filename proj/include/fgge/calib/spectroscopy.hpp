#pragma once

#include <sstream>
#include <vector>

#include "fgge/calib/analysis.hpp"
#include "fgge/calib/context.hpp"

namespace fgge::calib {

struct StarkSpectroscopy {
  double amplitude = 0.0;       // normalized drive amplitude
  double omega = 0.0;           // drive amplitude, rad/s
  double omega_fgge = 0.0;      // fitted center, rad/s
  double omega_fgge_error = 0.0;
  double delta_ac = 0.0;        // omega_fgge - static resonance
  double width = 0.0;
  double plateau = 0.0;         // probe plateau, s
  double probe_sigma = 0.0;     // probe edge width, s
  std::vector<double> frequencies;
  std::vector<double> p_g_a;    // population of g on A after the probe
  numerics::FitResult fit;
};

// Probe plateau for a pi transfer at the Floquet coupling of amplitude A.
inline double spectroscopy_plateau(CalibrationContext& ctx, double A) {
  const auto m = ctx.model_for(A);
  return units::pi / (2.0 * m->fgge_table()->g_at(1.0));
}

inline std::vector<double> default_frequency_grid(CalibrationContext& ctx, double A, int points = 41) {
  const auto& p = ctx.floquet_point(A);
  const double half = 3.0 * ctx.model_for(A)->fgge_table()->g_at(1.0);
  std::vector<double> f(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) f[static_cast<std::size_t>(k)] = p.omega_fgge - half + 2.0 * half * k / (points - 1);
  return f;
}

// Prepare |f,g> (ge then ef pi on A), apply the fg-ge probe at each carrier
// and fit the g population of A to a Gaussian. With the default gate-shaped
// edges the center includes the Stark chirp of the edges; a probe with
// sigma well below 1/g resolves the constant-amplitude resonance.
inline StarkSpectroscopy ac_stark_spectroscopy(CalibrationContext& ctx, double A, std::vector<double> freqs = {},
                                               double probe_sigma = units::ns(5.0)) {
  if (!(probe_sigma > 0.0)) throw ConfigError("ac_stark_spectroscopy: probe sigma must be positive");
  StarkSpectroscopy r;
  r.probe_sigma = probe_sigma;
  r.amplitude = A;
  r.omega = ctx.omega_from_amplitude(A);
  if (A == 0.0) {
    r.omega_fgge = ctx.static_resonance();
    return r;
  }
  const auto m = ctx.model_for(A);
  r.plateau = spectroscopy_plateau(ctx, A);
  if (freqs.empty()) freqs = default_frequency_grid(ctx, A);
  std::ostringstream trace;
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<Experiment> batch;
    for (double w : freqs) {
      Experiment e;
      e.before = {{Transmon::A, Transition::GE, units::pi, 0.0}, {Transmon::A, Transition::EF, units::pi, 0.0}};
      pulse::FlatTopPulse p;
      p.amplitude = A;
      p.omega = r.omega;
      p.carrier = w;
      p.plateau = r.plateau;
      p.sigma = probe_sigma;
      e.pulses.add(0.0, p);
      batch.push_back(std::move(e));
    }
    const auto pops = ctx.measure(*m, batch);
    r.frequencies = freqs;
    r.p_g_a.clear();
    for (const auto& q : pops) r.p_g_a.push_back(q.a[0]);
    const double c = 0.5 * (freqs.front() + freqs.back());
    std::vector<double> x;
    for (double w : freqs) x.push_back(units::to_mhz(w - c));
    r.fit = fit_gaussian_peak(x, r.p_g_a);
    const double center = units::mhz(r.fit.params[2]);
    if (r.fit.ok(0.9) && std::abs(center) < 0.5 * (freqs.back() - freqs.front())) {
      r.omega_fgge = c + center;
      r.omega_fgge_error = units::mhz(r.fit.std_error(2));
      r.width = units::mhz(std::abs(r.fit.params[3]));
      r.delta_ac = r.omega_fgge - ctx.static_resonance();
      return r;
    }
    trace << " R2=" << r.fit.r_squared << " span=" << units::to_mhz(freqs.back() - freqs.front()) << "MHz";
    const double half = freqs.back() - freqs.front();
    const double mid = freqs[static_cast<std::size_t>(std::max_element(r.p_g_a.begin(), r.p_g_a.end()) - r.p_g_a.begin())];
    const int n = static_cast<int>(freqs.size());
    for (int k = 0; k < n; ++k) freqs[static_cast<std::size_t>(k)] = mid - half + 2.0 * half * k / (n - 1);
  }
  throw NumericalError("ac_stark_spectroscopy: Gaussian fit failed after widening the grid;" + trace.str());
}

inline nlohmann::json to_json(const StarkSpectroscopy& r) {
  nlohmann::json j{{"amplitude", r.amplitude},
                   {"omega_MHz", units::to_mhz(r.omega)},
                   {"omega_fgge_GHz", units::to_ghz(r.omega_fgge)},
                   {"omega_fgge_error_MHz", units::to_mhz(r.omega_fgge_error)},
                   {"delta_ac_MHz", units::to_mhz(r.delta_ac)},
                   {"width_MHz", units::to_mhz(r.width)},
                   {"probe_plateau_ns", units::to_ns(r.plateau)},
                   {"probe_sigma_ns", units::to_ns(r.probe_sigma)}};
  if (r.fit.params.size() == 4) j["fit"] = fit_to_json(r.fit, {"offset", "amplitude", "center_MHz", "width_MHz"});
  return j;
}

}  // namespace fgge::calib
