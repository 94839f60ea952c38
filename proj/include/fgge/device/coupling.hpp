#pragma once

#include <cmath>

#include "fgge/core/errors.hpp"
#include "fgge/device/params.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/numerics/roots.hpp"

namespace fgge::device {

enum class JTildeCalibration {
  // J_tilde = J / (n01_A n01_B): the charge-basis coupling between the
  // computational states equals J at the device's own frequencies.
  OperatingPoint,
  // Match the minimum single-excitation splitting to 2J while sweeping
  // qubit B through resonance with qubit A.
  ResonanceSweep,
};

inline TransmonParams fitted_transmon(TransmonParams t) {
  const auto fit = fit_transmon_energies(t.omega_ge, t.alpha, t.n_cutoff);
  if (!fit.converged)
    throw NumericalError("transmon fit did not converge: residuals " + std::to_string(fit.residual_omega) + ", " +
                         std::to_string(fit.residual_alpha) + " rad/s");
  t.E_C = fit.E_C;
  t.E_J = fit.E_J;
  return t;
}

// Single-excitation splitting of the coupled charge model with qubit B
// retuned so that its ge frequency is omega_b.
inline double single_excitation_splitting(const DeviceParams& d, double omega_b) {
  DeviceParams tuned = d;
  tuned.qubit_b.omega_ge = omega_b;
  tuned.qubit_b = fitted_transmon(tuned.qubit_b);
  const StaticSystem sys(tuned, 3, 3);
  const RVec& e = sys.dressed_energies();
  return std::abs(e[sys.index(1, 0)] - e[sys.index(0, 1)]);
}

inline double minimum_resonant_splitting(const DeviceParams& d) {
  const double wa = d.qubit_a.omega_ge;
  const double span = 4.0 * std::max(d.J, 1.0);
  auto r = numerics::golden_section_min([&](double wb) { return single_excitation_splitting(d, wb); }, wa - span,
                                        wa + span, 1e-6 * span);
  return r.fx;
}

inline double calibrate_j_tilde(const DeviceParams& d, JTildeCalibration method) {
  const double n01a = d.qubit_a.spectrum(2).n01();
  const double n01b = d.qubit_b.spectrum(2).n01();
  const double operating = d.J / (n01a * n01b);
  if (method == JTildeCalibration::OperatingPoint || d.J == 0.0) return operating;
  auto mismatch = [&](double jt) {
    DeviceParams t = d;
    t.J_tilde = jt;
    return minimum_resonant_splitting(t) - 2.0 * d.J;
  };
  const auto root = numerics::root_find_scalar(mismatch, 0.5 * operating, 2.0 * operating, 1e-9 * operating);
  if (!root.converged) throw NumericalError("calibrate_j_tilde: resonance-sweep calibration did not converge");
  return root.x;
}

// Complete a device record given Table-style inputs: fits E_C, E_J for both
// transmons and sets J_tilde.
inline DeviceParams make_device(TransmonParams a, TransmonParams b, double J,
                                JTildeCalibration method = JTildeCalibration::OperatingPoint) {
  DeviceParams d;
  d.qubit_a = fitted_transmon(a);
  d.qubit_b = fitted_transmon(b);
  d.J = J;
  (void)validate(d);
  d.J_tilde = calibrate_j_tilde(d, method);
  return d;
}

}  // namespace fgge::device
