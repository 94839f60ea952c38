#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/device/transmon.hpp"

namespace fgge::device {

struct TransmonParams {
  double omega_ge = 0.0;  // rad/s
  double alpha = 0.0;     // rad/s, negative
  double E_C = 0.0;       // rad/s
  double E_J = 0.0;       // rad/s
  int n_cutoff = 15;
  double T1_ge = std::numeric_limits<double>::infinity();  // s
  double T1_ef = std::numeric_limits<double>::infinity();
  double T2_ge = std::numeric_limits<double>::infinity();
  double T2_ef = std::numeric_limits<double>::infinity();

  TransmonSpectrum spectrum(int levels) const { return diagonalize_transmon(E_C, E_J, n_cutoff, levels); }
};

enum class DriveTarget { A, B };

struct DeviceParams {
  TransmonParams qubit_a;
  TransmonParams qubit_b;
  double J = 0.0;        // ladder exchange, rad/s
  double J_tilde = 0.0;  // charge-basis n_A n_B coefficient, rad/s
  DriveTarget drive_target = DriveTarget::A;

  double detuning() const { return qubit_a.omega_ge - qubit_b.omega_ge; }
  const TransmonParams& transmon(int q) const { return q == 0 ? qubit_a : qubit_b; }
};

// Returns human-readable warnings for soft invariant violations and throws for
// hard ones.
inline std::vector<std::string> validate(const DeviceParams& d) {
  std::vector<std::string> warnings;
  const char* names[2] = {"qubit_a", "qubit_b"};
  for (int q = 0; q < 2; ++q) {
    const auto& t = d.transmon(q);
    const std::string n = names[q];
    if (!(t.omega_ge > 0.0)) throw ConfigError(n + ": ge frequency must be positive");
    if (!(t.alpha < 0.0)) throw ConfigError(n + ": anharmonicity must be negative");
    if (t.n_cutoff < 5) throw ConfigError(n + ": n_cutoff must be at least 5");
    for (double T : {t.T1_ge, t.T1_ef, t.T2_ge, t.T2_ef})
      if (!(T > 0.0)) throw ConfigError(n + ": coherence times must be positive");
    if (t.E_C > 0.0 && t.E_J > 0.0 && t.E_J / t.E_C <= 20.0)
      warnings.push_back(n + ": E_J/E_C = " + std::to_string(t.E_J / t.E_C) + " is outside the transmon regime");
    if (std::isfinite(t.T2_ge) && t.T2_ge > 2.0 * t.T1_ge * 1.05) warnings.push_back(n + ": T2_ge exceeds 2 T1_ge");
  }
  if (!(d.detuning() > 0.0)) throw ConfigError("device: qubit_a must be above qubit_b in frequency");
  if (d.J < 0.0) throw ConfigError("device: coupling J must be non-negative");
  if (d.J > 0.0 && std::abs(d.detuning() / d.J) <= 10.0)
    warnings.push_back("device: |Delta/J| <= 10, outside the dispersive regime");
  return warnings;
}

}  // namespace fgge::device
