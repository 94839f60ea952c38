#pragma once

#include <vector>

#include "fgge/calib/analysis.hpp"
#include "fgge/calib/context.hpp"
#include "fgge/calib/rabi.hpp"
#include "fgge/numerics/roots.hpp"

namespace fgge::calib {

struct ChevronScan {
  double amplitude = 0.0;
  double carrier = 0.0;  // resonance the detunings refer to
  std::vector<double> detunings;
  std::vector<double> plateaus;
  RMat p_e_b;  // detuning x plateau
  RMat p_f_a;
  std::vector<double> recovery_times;  // tau*(Delta), local quadratic refinement
  std::vector<double> recovery_minimum;
};

// First minimum of the f population of A after its first maximum.
inline std::size_t first_recovery_index(const std::vector<double>& pf) {
  const std::size_t n = pf.size();
  std::size_t k = 0;
  while (k + 1 < n && pf[k + 1] >= pf[k]) ++k;
  while (k + 1 < n && pf[k + 1] <= pf[k]) ++k;
  return k;
}

inline ChevronScan chevron_scan(CalibrationContext& ctx, double A, double carrier, std::vector<double> plateaus,
                                const std::vector<double>& detunings) {
  if (!(A > 0.0)) throw ConfigError("chevron_scan: amplitude must be positive");
  if (detunings.empty()) throw ConfigError("chevron_scan: empty detuning grid");
  const auto m = ctx.model_for(A);
  const double omega = ctx.omega_from_amplitude(A);
  ChevronScan r;
  r.amplitude = A;
  r.carrier = carrier;
  r.detunings = detunings;
  for (int attempt = 0;; ++attempt) {
    std::vector<Experiment> batch;
    for (double d : detunings)
      for (double t : plateaus)
        batch.push_back(fgge_experiment(A, omega, carrier + d, t, {{Transmon::B, Transition::GE, units::pi, 0.0}}));
    const auto pops = ctx.measure(*m, batch);
    const auto nd = static_cast<Eigen::Index>(detunings.size()), nt = static_cast<Eigen::Index>(plateaus.size());
    r.p_e_b.resize(nd, nt);
    r.p_f_a.resize(nd, nt);
    for (Eigen::Index i = 0; i < nd; ++i)
      for (Eigen::Index k = 0; k < nt; ++k) {
        const auto& q = pops[static_cast<std::size_t>(i * nt + k)];
        r.p_e_b(i, k) = q.b[1];
        r.p_f_a(i, k) = q.a[2];
      }
    r.recovery_times.clear();
    r.recovery_minimum.clear();
    bool at_edge = false;
    for (Eigen::Index i = 0; i < nd; ++i) {
      std::vector<double> pf(static_cast<std::size_t>(nt));
      for (Eigen::Index k = 0; k < nt; ++k) pf[static_cast<std::size_t>(k)] = r.p_f_a(i, k);
      const std::size_t k = first_recovery_index(pf);
      if (k + 1 >= pf.size()) at_edge = true;
      r.recovery_times.push_back(local_quadratic_extremum(plateaus, pf, k));
      r.recovery_minimum.push_back(pf[k]);
    }
    r.plateaus = plateaus;
    if (!at_edge) return r;
    if (attempt == 2) throw NumericalError("chevron_scan: recovery at the end of the plateau grid after extending it");
    const double step = plateaus.back() - plateaus.front();
    const std::size_t n = plateaus.size();
    for (std::size_t k = 0; k < n; ++k) plateaus[k] = plateaus.front() + 2.0 * step * static_cast<double>(k) / static_cast<double>(n - 1);
  }
}

// tau* at one detuning: minimum f population of A from |g,e>, by golden
// section inside [lo, hi].
inline numerics::ScalarMin recovery_time(CalibrationContext& ctx, double A, double carrier, double lo, double hi) {
  const auto m = ctx.model_for(A);
  const double omega = ctx.omega_from_amplitude(A);
  const auto leak = [&](double tau) {
    const auto e = fgge_experiment(A, omega, carrier, tau, {{Transmon::B, Transition::GE, units::pi, 0.0}});
    return qutrit_populations(*m, ctx.run(*m, e)).a[2];
  };
  return numerics::golden_section_min(leak, lo, hi, units::ns(1e-3));
}

// Plateau time producing the same coupling area as both edges of the pulse.
inline double plateau_equivalent_edges(const pulse::FlatTopPulse& p, const floquet::DriveTable& t, int steps = 400) {
  const double scale = p.omega / t.amplitude_max;
  const double g1 = t.g_at(scale);
  const double h = p.edge() / steps;
  double area = 0.0;
  for (int k = 0; k < steps; ++k) area += h * t.g_at(scale * p.shape((k + 0.5) * h));
  return 2.0 * area / g1;
}

inline nlohmann::json to_json(const ChevronScan& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.detunings.size(); ++i)
    rows.push_back({{"detuning_MHz", units::to_mhz(r.detunings[i])},
                    {"tau_star_ns", units::to_ns(r.recovery_times[i])},
                    {"p_f_min", r.recovery_minimum[i]}});
  return {{"amplitude", r.amplitude}, {"carrier_GHz", units::to_ghz(r.carrier)}, {"recovery", rows}};
}

}  // namespace fgge::calib
