#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/device/params.hpp"
#include "fgge/pulse/envelope.hpp"

namespace fgge::pulse {

// Markovian error channels of the two transmons, per level:
// decay |k> -> |k-1> with `rate`, and dephasing sqrt(2 rate) |k><k|.
struct CollapseSet {
  struct Channel {
    Transmon target = Transmon::A;
    int level = 1;
    double rate = 0.0;  // 1/s
  };
  std::vector<Channel> decay;
  std::vector<Channel> dephasing;

  bool empty() const {
    auto zero = [](const Channel& c) { return c.rate == 0.0; };
    return std::all_of(decay.begin(), decay.end(), zero) && std::all_of(dephasing.begin(), dephasing.end(), zero);
  }

  static CollapseSet none() { return {}; }

  // Rates from the coherence times. Decay of level k >= 3 scales like k
  // relative to the f level. Pure dephasing of e is 1/T2ge - 1/(2 T1ge);
  // for f the rate makes the e-f coherence decay at 1/T2ef; levels above f
  // share the f rate. Negative values are clamped to zero. `time_scale`
  // multiplies every T1 and T2.
  static CollapseSet from_device(const device::DeviceParams& d, int levels_a, int levels_b, double time_scale = 1.0) {
    if (!(time_scale > 0.0)) throw ConfigError("CollapseSet: time scale must be positive");
    CollapseSet c;
    auto add = [&](Transmon q, const device::TransmonParams& p, int levels) {
      const double g1 = 1.0 / (p.T1_ge * time_scale), f1 = 1.0 / (p.T1_ef * time_scale);
      const double ge = std::max(0.0, 1.0 / (p.T2_ge * time_scale) - 0.5 * g1);
      const double ef = std::max(0.0, 1.0 / (p.T2_ef * time_scale) - 0.5 * (g1 + f1) - ge);
      for (int k = 1; k < levels; ++k) {
        const double rate = k == 1 ? g1 : f1 * k / 2.0;
        c.decay.push_back({q, k, rate});
        c.dephasing.push_back({q, k, k == 1 ? ge : ef});
      }
    };
    add(Transmon::A, d.qubit_a, levels_a);
    add(Transmon::B, d.qubit_b, levels_b);
    return c;
  }
};

}  // namespace fgge::pulse
