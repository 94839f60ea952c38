#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/split_operator.hpp"
#include "fgge/pulse/schedule.hpp"

namespace fgge::pulse {

// Closed-system lab-frame evolution of a schedule on the dressed static
// system, with every pulse applied as a real carrier-modulated field on its
// transmon's line (no rotating-wave approximation). Used to validate the
// rotating-frame model.
class LabFrameSimulator {
 public:
  explicit LabFrameSimulator(const device::DeviceParams& d, int levels_a = 6, int levels_b = 4)
      : sys_(d, levels_a, levels_b) {}

  const device::StaticSystem& statics() const { return sys_; }
  int steps_per_period = 256;

  // Final states, in the qubit frame of the dressed levels, for each listed
  // initial dressed level.
  CMat run(const PulseSchedule& sched, const std::vector<int>& inputs) const {
    const int n = sys_.dim();
    const double offset = sys_.dressed_energies().mean();
    const RVec energies = sys_.dressed_energies().array() - offset;
    std::vector<Drive> drives;
    double fastest = 0.0;
    const auto& entries = sched.entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      const FrameTracker f = sched.frames_before(k);
      if (auto* p = std::get_if<FlatTopPulse>(&e.op)) {
        const std::size_t line = sys_.device().drive_target == device::DriveTarget::A ? 0 : 1;
        drives.push_back({e.start, *p, {}, line, true, p->carrier, p->phase - 2.0 * f[Transmon::A] + f[Transmon::B], 0.0, 0.0});
        fastest = std::max(fastest, p->carrier);
      } else if (auto* q = std::get_if<DragPulse>(&e.op)) {
        const double ge = q->target == Transmon::A ? sys_.qubit_frequency_a() : sys_.qubit_frequency_b();
        const double ef = q->target == Transmon::A ? sys_.energy(2, 0) - sys_.energy(1, 0) : sys_.energy(0, 2) - sys_.energy(0, 1);
        const auto& sp = q->target == Transmon::A ? sys_.spectrum_a() : sys_.spectrum_b();
        const double lam = q->transition == Transition::GE ? 1.0 : sp.n_matrix(1, 2) / sp.n01();
        const double alpha = q->transition == Transition::GE ? ef - ge : ge - ef;
        const double carrier = (q->transition == Transition::GE ? ge : ef) + q->detuning;
        drives.push_back({e.start, {}, *q, q->target == Transmon::A ? 0u : 1u, false, carrier, q->axis - f[q->target], lam, alpha});
        fastest = std::max(fastest, carrier);
      }
    }
    const double T = sched.duration();
    CMat x = CMat::Zero(n, static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t k = 0; k < inputs.size(); ++k) x(inputs[k], static_cast<Eigen::Index>(k)) = 1.0;
    if (T > 0.0 && !drives.empty()) {
      std::vector<std::size_t> lines;
      std::vector<RMat> ops;
      for (std::size_t line = 0; line < 2; ++line) {
        if (std::none_of(drives.begin(), drives.end(), [&](const Drive& d) { return d.line == line; })) continue;
        lines.push_back(line);
        ops.push_back(floquet::dressed_operator(sys_, line == 0 ? sys_.drive_operator_a() : sys_.drive_operator_b()));
      }
      const floquet::SplitOperatorStepper stepper(energies, ops);
      const double h_max = units::two_pi / fastest / steps_per_period;
      const long steps = static_cast<long>(std::ceil(T / h_max));
      stepper.evolve(x, 0.0, T, steps, [&](double t, std::size_t k) {
        double v = 0.0;
        for (const auto& d : drives)
          if (d.line == lines[k]) v += d.field(t);
        return v;
      });
    } else {
      for (int i = 0; i < n; ++i) x.row(i) *= std::exp(cplx(0.0, -energies[i] * T));
    }
    const FrameTracker fin = sched.final_frames();
    for (int i = 0; i < n; ++i) {
      const int a = i / sys_.levels_b(), b = i % sys_.levels_b();
      const double frame = sys_.energy(0, 0) + a * sys_.qubit_frequency_a() + b * sys_.qubit_frequency_b();
      x.row(i) *= std::exp(cplx(0.0, (frame - offset) * T + fin[Transmon::A] * a + fin[Transmon::B] * b));
    }
    return x;
  }

 private:
  struct Drive {
    double start;
    FlatTopPulse flat;
    DragPulse drag;
    std::size_t line;
    bool is_flat;
    double carrier;
    double phase;
    double lambda;
    double alpha;

    // Re[eps(t) exp(-i carrier t)].
    double field(double t) const {
      const double u = t - start;
      if (is_flat) {
        if (u <= 0.0 || u >= flat.duration()) return 0.0;
        return flat.envelope(u) * std::cos(carrier * t - phase);
      }
      if (u <= 0.0 || u >= drag.duration()) return 0.0;
      const cplx eps(drag.in_phase(u, lambda), drag.quadrature(u, lambda, alpha));
      return (eps * std::exp(cplx(0.0, phase - carrier * t))).real();
    }
  };

  device::StaticSystem sys_;
};

}  // namespace fgge::pulse
