#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fgge/core/errors.hpp"
#include "fgge/numerics/roots.hpp"

namespace fgge::floquet {

struct ConversionFit {
  double c_conv = 0.0;  // A = c_conv * Omega, in s/rad
  double residual = 0.0;
  int points_used = 0;
};

namespace detail {
inline double interpolate(const std::vector<std::pair<double, double>>& curve, double x) {
  if (x <= curve.front().first) {
    const auto& [x0, y0] = curve[0];
    const auto& [x1, y1] = curve[1];
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  }
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (x <= curve[i].first) {
      const auto& [x0, y0] = curve[i - 1];
      const auto& [x1, y1] = curve[i];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  const auto& [x0, y0] = curve[curve.size() - 2];
  const auto& [x1, y1] = curve.back();
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}
}  // namespace detail

// Least-squares abscissa scaling aligning measured (A, y) with a simulated
// curve (Omega, y): y_meas(A) ~ y_sim(A / c_conv). Only points with
// A <= max_amplitude enter.
inline ConversionFit conversion_factor_fit(const std::vector<std::pair<double, double>>& measured,
                                           std::vector<std::pair<double, double>> simulated,
                                           double max_amplitude = 0.6) {
  std::vector<std::pair<double, double>> used;
  for (const auto& m : measured)
    if (m.first <= max_amplitude) used.push_back(m);
  if (used.size() < 3) throw ConfigError("conversion_factor_fit: fewer than 3 points with A <= max amplitude");
  if (simulated.size() < 2) throw ConfigError("conversion_factor_fit: simulated curve needs at least 2 points");
  std::sort(simulated.begin(), simulated.end());
  auto ssr = [&](double log_c) {
    const double c = std::exp(log_c);
    double s = 0.0;
    for (const auto& [a, y] : used) {
      const double r = y - detail::interpolate(simulated, a / c);
      s += r * r;
    }
    return s;
  };
  // Initial scale from the largest usable point matched against the curve
  // by ordinate.
  const auto far = *std::max_element(used.begin(), used.end());
  double omega_match = simulated.back().first;
  for (std::size_t i = 1; i < simulated.size(); ++i) {
    const double y0 = simulated[i - 1].second, y1 = simulated[i].second;
    if ((far.second - y0) * (far.second - y1) <= 0.0 && y1 != y0) {
      omega_match = simulated[i - 1].first + (simulated[i].first - simulated[i - 1].first) * (far.second - y0) / (y1 - y0);
      break;
    }
  }
  const double c0 = far.first / std::max(omega_match, 1e-300);
  // Coarse log scan then golden refinement.
  double best = std::log(c0), best_val = ssr(best);
  for (int k = -40; k <= 40; ++k) {
    const double lc = std::log(c0) + 0.05 * k;
    const double v = ssr(lc);
    if (v < best_val) {
      best_val = v;
      best = lc;
    }
  }
  const auto m = numerics::golden_section_min(ssr, best - 0.05, best + 0.05, 1e-12);
  return {std::exp(m.x), std::sqrt(m.fx), static_cast<int>(used.size())};
}

}  // namespace fgge::floquet
