#pragma once

#include <cmath>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"

namespace fgge::calib {

// Two-level round trip in the fg-ge manifold with instantaneous switching.
struct AnalyticGate {
  double t_g = 0.0;        // s
  double phi_fgge = 0.0;   // geometric phase, rad
  double phi_zz = 0.0;     // dispersive phase over t_g, rad
  double condition = 0.0;  // phi_fgge - (pi + chi t_g); zero at the CZ point
  double total() const { return phi_fgge + phi_zz; }
};

inline AnalyticGate analytic_gate_math(double g, double delta, double chi = 0.0) {
  const double rate = std::sqrt(g * g + 0.25 * delta * delta);
  if (!(rate > 0.0)) throw ConfigError("analytic_gate_math: g and detuning are both zero");
  AnalyticGate a;
  a.t_g = units::pi / rate;
  a.phi_fgge = units::pi - 0.5 * delta * a.t_g;
  a.phi_zz = -chi * a.t_g;
  a.condition = a.phi_fgge - (units::pi + chi * a.t_g);
  return a;
}

// Detuning at which the geometric phase cancels the dispersive phase.
inline double cz_detuning(double chi) { return -2.0 * chi; }

}  // namespace fgge::calib
