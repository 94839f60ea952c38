#pragma once

#include <cmath>
#include <sstream>

#include "fgge/core/errors.hpp"
#include "fgge/device/drive.hpp"
#include "fgge/device/static_system.hpp"
#include "fgge/floquet/split_operator.hpp"

namespace fgge::floquet {

struct PropagatorOptions {
  int steps_per_period = 256;
  double unitarity_tol = 1e-8;
  int max_refinements = 3;
};

struct Propagator {
  CMat U;  // one-period propagator in the dressed static basis
  double period = 0.0;
  int steps = 0;
  double unitarity_error = 0.0;
};

// Integrator for the lab-frame Schroedinger equation of a static system
// driven on its target transmon, working in the dressed basis.
class DrivenSystemStepper {
 public:
  explicit DrivenSystemStepper(const device::StaticSystem& sys)
      : offset_(sys.dressed_energies().mean()),
        stepper_(RVec(sys.dressed_energies().array() - offset_), {dressed_operator(sys, sys.drive_operator())}) {}

  double energy_offset() const { return offset_; }
  const SplitOperatorStepper& stepper() const { return stepper_; }

  template <class X>
  void evolve(X& x, const DriveSpec& drive, double t0, double t1, long steps) const {
    stepper_.evolve(x, t0, t1, steps, [&](double t, std::size_t) { return drive.field(t); });
  }

 private:
  double offset_;
  SplitOperatorStepper stepper_;
};

inline Propagator one_period_propagator(const DrivenSystemStepper& stepper, const DriveSpec& drive,
                                        const PropagatorOptions& opt = {}) {
  if (!(drive.omega > 0.0)) throw std::invalid_argument("one_period_propagator: drive frequency must be positive");
  const double period = drive.period();
  int steps = std::max(opt.steps_per_period, 1);
  const int n = stepper.stepper().dim();
  std::ostringstream trace;
  for (int attempt = 0; attempt <= opt.max_refinements; ++attempt, steps *= 2) {
    CMat u = CMat::Identity(n, n);
    stepper.evolve(u, drive, 0.0, period, steps);
    u *= std::exp(cplx(0.0, -stepper.energy_offset() * period));
    const double err = numerics::unitarity_error(u);
    if (err < opt.unitarity_tol) return {u, period, steps, err};
    trace << " steps=" << steps << " err=" << err;
  }
  throw NumericalError("one_period_propagator: unitarity tolerance not met;" + trace.str());
}

inline Propagator one_period_propagator(const device::StaticSystem& sys, const DriveSpec& drive,
                                        const PropagatorOptions& opt = {}) {
  return one_period_propagator(DrivenSystemStepper(sys), drive, opt);
}

}  // namespace fgge::floquet
