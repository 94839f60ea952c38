#pragma once

#include <cmath>
#include <stdexcept>

namespace fgge::device {

namespace detail {
inline void require_off_pole(double den, double scale, const char* what) {
  if (std::abs(den) <= 1e-12 * std::max(scale, 1e-300)) throw std::domain_error(what);
}
}  // namespace detail

// Drive-induced fg-ge coupling, Omega J alpha_a / (sqrt 2 Delta (Delta + alpha_a)).
inline double analytic_g_fgge(double Omega, double J, double alpha_a, double Delta) {
  const double scale = std::abs(Delta) + std::abs(alpha_a);
  detail::require_off_pole(Delta, scale, "analytic_g_fgge: pole at Delta = 0");
  detail::require_off_pole(Delta + alpha_a, scale, "analytic_g_fgge: pole at Delta = -alpha_a");
  return Omega * J * alpha_a / (std::sqrt(2.0) * Delta * (Delta + alpha_a));
}

// Dispersive shift 2 J^2 (alpha_a + alpha_b) / ((Delta + alpha_a)(Delta - alpha_b)).
inline double analytic_chi(double J, double alpha_a, double alpha_b, double Delta) {
  const double scale = std::abs(Delta) + std::abs(alpha_a) + std::abs(alpha_b);
  detail::require_off_pole(Delta + alpha_a, scale, "analytic_chi: pole at Delta = -alpha_a");
  detail::require_off_pole(Delta - alpha_b, scale, "analytic_chi: pole at Delta = alpha_b");
  return 2.0 * J * J * (alpha_a + alpha_b) / ((Delta + alpha_a) * (Delta - alpha_b));
}

}  // namespace fgge::device
