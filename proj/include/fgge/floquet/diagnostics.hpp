#pragma once

#include <algorithm>
#include <vector>

#include "fgge/core/units.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/modes.hpp"
#include "fgge/floquet/propagator.hpp"

namespace fgge::floquet {

struct HigherLevelPopulations {
  std::vector<double> max_population;  // per level of the driven transmon, max over one period
  double mode_overlap = 0.0;           // |<fg|mode>|^2 of the selected Floquet mode
  bool truncation_warning = false;     // top kept level exceeded 1 %

  double level(int k) const { return k < static_cast<int>(max_population.size()) ? max_population[k] : 0.0; }
};

// Level populations of the driven transmon inside the Floquet mode closest
// to |f,g>, sampled over one drive period in the product basis of transmon
// levels. Drive slightly off the fg-ge resonance so that mode stays fg-like.
inline HigherLevelPopulations higher_level_diagnostics(const device::StaticSystem& sys, const DriveSpec& drive,
                                                       const PropagatorOptions& opt = {}) {
  const int la = sys.levels_a(), lb = sys.levels_b();
  HigherLevelPopulations out;
  out.max_population.assign(la, 0.0);
  const DrivenSystemStepper stepper(sys);
  const auto prop = one_period_propagator(stepper, drive, opt);
  const auto spec = floquet_modes(prop.U, prop.period);
  const int fg = sys.index(2, 0);
  int best = 0;
  double w = -1.0;
  for (int j = 0; j < static_cast<int>(spec.modes.size()); ++j) {
    const double o = std::norm(spec.modes[j].vector[fg]);
    if (o > w) {
      w = o;
      best = j;
    }
  }
  out.mode_overlap = w;
  CVec psi = spec.modes[best].vector;
  const RMat& v = sys.dressed_vectors();
  auto record = [&](const CVec& x) {
    const CVec prod = numerics::real_times_complex(v, x);
    for (int a = 0; a < la; ++a) {
      double p = 0.0;
      for (int b = 0; b < lb; ++b) p += std::norm(prod[sys.index(a, b)]);
      out.max_population[a] = std::max(out.max_population[a], p);
    }
  };
  record(psi);
  const double h = prop.period / prop.steps;
  for (int n = 0; n < prop.steps; ++n) {
    stepper.evolve(psi, drive, n * h, (n + 1) * h, 1);
    record(psi);
  }
  out.truncation_warning = out.max_population.back() > 0.01;
  return out;
}

}  // namespace fgge::floquet
