#pragma once

#include <cmath>

#include "fgge/core/units.hpp"

namespace fgge {

// Lab-frame drive Omega cos(omega t + phase) on the drive-target transmon.
struct DriveSpec {
  double amplitude = 0.0;  // rad/s
  double omega = 0.0;      // rad/s
  double phase = 0.0;      // rad

  double period() const { return units::two_pi / omega; }
  double field(double t) const { return amplitude * std::cos(omega * t + phase); }
};

}  // namespace fgge
