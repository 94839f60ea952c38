#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fgge/core/errors.hpp"

namespace fgge::numerics {

template <class T>
bool all_finite(const T& y) {
  if constexpr (requires { y.allFinite(); })
    return y.allFinite();
  else
    return std::isfinite(std::abs(y));
}

// One classical Runge-Kutta step of dy/dt = rhs(t, y).
template <class State, class Rhs>
State rk4_step(Rhs& rhs, const State& y, double t, double h) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// Fixed-step RK4 from t0 to t1. The step count is ceil((t1-t0)/dt) so the
// final time is hit exactly with a uniform step no larger than dt.
template <class State, class Rhs>
State ode_step_evolve(Rhs&& rhs, State y, double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ode_step_evolve: dt must be positive");
  const double span = t1 - t0;
  if (span == 0.0) return y;
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / dt - 1e-9)));
  const double h = span / static_cast<double>(steps);
  for (long n = 0; n < steps; ++n) {
    y = rk4_step(rhs, y, t0 + static_cast<double>(n) * h, h);
    if ((n & 63) == 63 || n + 1 == steps) {
      if (!all_finite(y))
        throw NumericalError("ode_step_evolve: non-finite state at step " + std::to_string(n + 1));
    }
  }
  return y;
}

}  // namespace fgge::numerics
