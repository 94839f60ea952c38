#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/parallel.hpp"
#include "fgge/core/units.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/modes.hpp"
#include "fgge/floquet/propagator.hpp"
#include "fgge/numerics/roots.hpp"

namespace fgge::floquet {

struct ScanWindow {
  double center = 0.0;      // rad/s
  double half_width = 0.0;  // rad/s
  int points = 41;
};

struct SpectroscopyOptions {
  PropagatorOptions propagator;
  int coarse_points = 41;
  double half_width = units::mhz(15.0);
  double tolerance = units::khz(1.0);
  unsigned workers = 1;
};

// Two orthonormal vectors spanning the fg/ge subspace being followed.
struct PairReference {
  CVec first;
  CVec second;
};

struct PairGap {
  double gap = 0.0;
  CVec mode_first;   // mode with the larger weight in the reference span
  CVec mode_second;
  double quasienergy_first = 0.0;
  double quasienergy_second = 0.0;
  double weight_first = 0.0;
  double weight_second = 0.0;
};

struct SpectroscopyPoint {
  double amplitude = 0.0;   // Omega, rad/s
  double omega_fgge = 0.0;  // rad/s
  double g_fgge = 0.0;      // rad/s, half the minimal gap
  double delta_ac = 0.0;    // omega_fgge - omega_fgge,0
  double pop_h = 0.0;
  double pop_i = 0.0;
  PairReference modes;      // hybridized pair at resonance, for tracking
  int evaluations = 0;
  bool widened = false;
};

// For a list of (quasienergy, vector) modes pick the two with the largest
// weight in span(ref) and return their folded quasienergy gap.
inline PairGap pair_gap(const std::vector<std::pair<double, CVec>>& modes, const PairReference& ref, double fold) {
  int i0 = -1, i1 = -1;
  double w0 = -1.0, w1 = -1.0;
  for (int j = 0; j < static_cast<int>(modes.size()); ++j) {
    const auto& v = modes[j].second;
    const double w = std::norm(ref.first.dot(v)) + std::norm(ref.second.dot(v));
    if (w > w0) {
      i1 = i0;
      w1 = w0;
      i0 = j;
      w0 = w;
    } else if (w > w1) {
      i1 = j;
      w1 = w;
    }
  }
  PairGap g;
  double d = modes[i0].first - modes[i1].first;
  if (fold > 0.0) d = fold_quasienergy(d, fold);
  g.gap = std::abs(d);
  g.mode_first = modes[i0].second;
  g.mode_second = modes[i1].second;
  g.quasienergy_first = modes[i0].first;
  g.quasienergy_second = modes[i1].first;
  g.weight_first = w0;
  g.weight_second = w1;
  return g;
}

inline PairReference bare_pair(const device::StaticSystem& sys) {
  const int n = sys.dim();
  PairReference r{CVec::Zero(n), CVec::Zero(n)};
  r.first[sys.index(2, 0)] = 1.0;
  r.second[sys.index(0, 1)] = 1.0;
  return r;
}

inline PairGap floquet_pair_gap(const DrivenSystemStepper& stepper, double Omega, double omega,
                                const PairReference& ref, const PropagatorOptions& opt) {
  const auto prop = one_period_propagator(stepper, DriveSpec{Omega, omega, 0.0}, opt);
  const auto spec = floquet_modes(prop.U, prop.period);
  std::vector<std::pair<double, CVec>> modes;
  modes.reserve(spec.modes.size());
  for (const auto& m : spec.modes) modes.emplace_back(m.quasienergy, m.vector);
  return pair_gap(modes, ref, omega);
}

using GapFunction = std::function<PairGap(double omega)>;

// Coarse grid plus golden-section refinement of the minimal pair gap.
// Retries once with a recentred, doubled window when the coarse minimum
// sits on the window edge.
inline SpectroscopyPoint locate_anticrossing(const GapFunction& gap, ScanWindow window, double tolerance,
                                             unsigned workers) {
  SpectroscopyPoint p;
  std::ostringstream trace;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int n = std::max(window.points, 5);
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = window.center - window.half_width + 2.0 * window.half_width * i / (n - 1);
    const auto gaps = parallel_map(static_cast<std::size_t>(n), workers, [&](std::size_t i) { return gap(grid[i]).gap; });
    p.evaluations += n;
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (gaps[i] < gaps[best]) best = i;
    trace << " [window " << units::to_ghz(window.center) << " GHz +/- " << units::to_mhz(window.half_width)
          << " MHz, min index " << best << "/" << n - 1 << ", gap " << units::to_mhz(gaps[best]) << " MHz]";
    if (best == 0 || best == n - 1) {
      window.center = grid[best];
      window.half_width *= 2.0;
      p.widened = true;
      continue;
    }
    int evals = 0;
    auto f = [&](double w) {
      ++evals;
      return gap(w).gap;
    };
    const auto m = numerics::golden_section_min(f, grid[best - 1], grid[best + 1], tolerance);
    p.evaluations += evals;
    const auto at = gap(m.x);
    p.omega_fgge = m.x;
    p.g_fgge = 0.5 * at.gap;
    p.modes = {at.mode_first, at.mode_second};
    return p;
  }
  throw NumericalError("fg-ge anti-crossing not bracketed:" + trace.str());
}

inline SpectroscopyPoint fgge_spectroscopy(const device::StaticSystem& sys, double Omega, const ScanWindow& window,
                                           const SpectroscopyOptions& opt = {}, const PairReference* ref = nullptr) {
  const double omega0 = sys.fgge_resonance();
  if (Omega == 0.0) {
    SpectroscopyPoint p;
    p.omega_fgge = omega0;
    p.modes = bare_pair(sys);
    return p;
  }
  const DrivenSystemStepper stepper(sys);
  const PairReference r = ref ? *ref : bare_pair(sys);
  auto gap = [&](double w) { return floquet_pair_gap(stepper, Omega, w, r, opt.propagator); };
  auto p = locate_anticrossing(gap, window, opt.tolerance, opt.workers);
  p.amplitude = Omega;
  p.delta_ac = p.omega_fgge - omega0;
  return p;
}

// Predicted ac-Stark shift for the next amplitude, extrapolating linearly in
// Omega^2 from the previous points.
inline double predict_shift(const std::vector<SpectroscopyPoint>& done, double Omega) {
  std::vector<const SpectroscopyPoint*> nz;
  for (const auto& p : done)
    if (p.amplitude > 0.0) nz.push_back(&p);
  if (nz.empty()) return 0.0;
  const auto& a = *nz.back();
  if (nz.size() == 1) return a.delta_ac * (Omega * Omega) / (a.amplitude * a.amplitude);
  const auto& b = *nz[nz.size() - 2];
  const double x0 = b.amplitude * b.amplitude, x1 = a.amplitude * a.amplitude;
  return a.delta_ac + (a.delta_ac - b.delta_ac) * (Omega * Omega - x1) / (x1 - x0);
}

using PointSolver = std::function<SpectroscopyPoint(double Omega, const ScanWindow&, const PairReference*)>;

inline std::vector<SpectroscopyPoint> tracked_scan(const std::vector<double>& amplitudes, double omega0,
                                                   const SpectroscopyOptions& opt, const PointSolver& solve) {
  for (std::size_t i = 1; i < amplitudes.size(); ++i)
    if (!(amplitudes[i] > amplitudes[i - 1])) throw ConfigError("spectroscopy scan: amplitudes must increase");
  std::vector<SpectroscopyPoint> out;
  const PairReference* ref = nullptr;
  for (double Omega : amplitudes) {
    ScanWindow w{omega0 + predict_shift(out, Omega), opt.half_width, opt.coarse_points};
    out.push_back(solve(Omega, w, ref));
    ref = &out.back().modes;
  }
  return out;
}

inline std::vector<SpectroscopyPoint> floquet_spectroscopy_scan(const device::StaticSystem& sys,
                                                                const std::vector<double>& amplitudes,
                                                                const SpectroscopyOptions& opt = {}) {
  return tracked_scan(amplitudes, sys.fgge_resonance(), opt,
                      [&](double Omega, const ScanWindow& w, const PairReference* ref) {
                        return fgge_spectroscopy(sys, Omega, w, opt, ref);
                      });
}

}  // namespace fgge::floquet
