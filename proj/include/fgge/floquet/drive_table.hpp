#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "fgge/core/errors.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/modes.hpp"
#include "fgge/floquet/propagator.hpp"
#include "fgge/floquet/spectroscopy.hpp"

namespace fgge::floquet {

// Effective rotating-frame parameters versus drive amplitude at a fixed drive
// frequency: Floquet shift of every kept level and the fg-ge exchange rate.
struct DriveTable {
  double omega_drive = 0.0;   // rad/s
  double amplitude_max = 0.0; // Omega at s = 1, rad/s
  int levels_a = 4;
  int levels_b = 3;
  std::vector<double> s;      // amplitude grid, fraction of amplitude_max
  std::vector<RVec> shifts;   // per grid point, indexed a * levels_b + b
  std::vector<double> g;      // rad/s

  int index(int a, int b) const { return a * levels_b + b; }
  int dim() const { return levels_a * levels_b; }

  // Shifts are interpolated linearly in s^2, the coupling linearly in s.
  RVec shift_at(double x) const {
    const auto [i, w] = locate(x);
    const double x2 = std::clamp(x, s.front(), s.back());
    const double v = (x2 * x2 - s[i] * s[i]) / (s[i + 1] * s[i + 1] - s[i] * s[i]);
    return (1.0 - v) * shifts[i] + v * shifts[i + 1];
  }
  double g_at(double x) const {
    const auto [i, w] = locate(x);
    return (1.0 - w) * g[i] + w * g[i + 1];
  }

 private:
  std::pair<std::size_t, double> locate(double x) const {
    if (s.size() < 2) throw ConfigError("DriveTable: needs at least two grid points");
    x = std::clamp(x, s.front(), s.back());
    std::size_t i = std::upper_bound(s.begin(), s.end(), x) - s.begin();
    i = std::clamp<std::size_t>(i, 1, s.size() - 1) - 1;
    return {i, (x - s[i]) / (s[i + 1] - s[i])};
  }
};

// Builds the table by following each mode from the bare state at zero
// amplitude. Levels outside the fg/ge pair get the folded quasienergy shift
// of their mode. The pair is projected onto the bare fg/ge vectors, the
// projection made unitary (Loewdin), and the pair quasienergies rotated back
// into a 2x2 block whose off-diagonal is g.
inline DriveTable extract_drive_table(const device::StaticSystem& sys, double amplitude_max, double omega_drive,
                                      int points = 41, int levels_a = 4, int levels_b = 3,
                                      const PropagatorOptions& opt = {}) {
  if (levels_a < 3 || levels_b < 2 || levels_a > sys.levels_a() || levels_b > sys.levels_b())
    throw ConfigError("extract_drive_table: kept levels must include f on A and e on B and fit the static system");
  if (points < 2) throw ConfigError("extract_drive_table: need at least two amplitudes");
  DriveTable tab;
  tab.omega_drive = omega_drive;
  tab.amplitude_max = amplitude_max;
  tab.levels_a = levels_a;
  tab.levels_b = levels_b;
  const int n = sys.dim();
  const int fg = tab.index(2, 0), ge = tab.index(0, 1);
  std::vector<CVec> ref(tab.dim());
  for (int a = 0; a < levels_a; ++a)
    for (int b = 0; b < levels_b; ++b) {
      ref[tab.index(a, b)] = CVec::Zero(n);
      ref[tab.index(a, b)][sys.index(a, b)] = 1.0;
    }
  const CVec bare_fg = ref[fg], bare_ge = ref[ge];
  auto target = [&](int a, int b) { return sys.energy(a, b) - (a + b) * omega_drive; };
  const DrivenSystemStepper stepper(sys);
  for (int p = 0; p < points; ++p) {
    const double x = static_cast<double>(p) / (points - 1);
    RVec shift = RVec::Zero(tab.dim());
    double g = 0.0;
    if (x == 0.0) {
      tab.s.push_back(x);
      tab.shifts.push_back(shift);
      tab.g.push_back(g);
      continue;
    }
    const auto prop = one_period_propagator(stepper, DriveSpec{x * amplitude_max, omega_drive, 0.0}, opt);
    const auto spec = floquet_modes(prop.U, prop.period);
    std::vector<bool> used(spec.modes.size(), false);
    std::vector<CVec> next = ref;
    for (int a = 0; a < levels_a; ++a)
      for (int b = 0; b < levels_b; ++b) {
        const int k = tab.index(a, b);
        if (k == fg || k == ge) continue;
        int best = -1;
        double w = -1.0;
        for (int j = 0; j < static_cast<int>(spec.modes.size()); ++j) {
          const double o = std::norm(ref[k].dot(spec.modes[j].vector));
          if (!used[j] && o > w) {
            w = o;
            best = j;
          }
        }
        used[best] = true;
        shift[k] = fold_quasienergy(spec.modes[best].quasienergy - target(a, b), omega_drive);
        next[k] = spec.modes[best].vector;
      }
    std::vector<std::pair<double, CVec>> modes;
    for (const auto& m : spec.modes) modes.emplace_back(m.quasienergy, m.vector);
    const auto pg = pair_gap(modes, PairReference{ref[fg], ref[ge]}, 0.0);
    Eigen::Matrix2cd c;
    c << bare_fg.dot(pg.mode_first), bare_fg.dot(pg.mode_second), bare_ge.dot(pg.mode_first),
        bare_ge.dot(pg.mode_second);
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix2cd co = svd.matrixU() * svd.matrixV().adjoint();
    const double t0 = target(0, 1);
    Eigen::Vector2d e(t0 + fold_quasienergy(pg.quasienergy_first - t0, omega_drive),
                      t0 + fold_quasienergy(pg.quasienergy_second - t0, omega_drive));
    const Eigen::Matrix2cd h2 = co * e.cast<cplx>().asDiagonal() * co.adjoint();
    shift[fg] = h2(0, 0).real() - target(2, 0);
    shift[ge] = h2(1, 1).real() - target(0, 1);
    g = std::abs(h2(0, 1));
    next[fg] = pg.mode_first;
    next[ge] = pg.mode_second;
    ref = std::move(next);
    tab.s.push_back(x);
    tab.shifts.push_back(shift);
    tab.g.push_back(g);
  }
  return tab;
}

}  // namespace fgge::floquet
