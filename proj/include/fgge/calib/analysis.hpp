#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"
#include "fgge/numerics/linalg.hpp"
#include "fgge/numerics/models.hpp"
#include "fgge/numerics/nlls.hpp"

namespace fgge::calib {

inline nlohmann::json fit_to_json(const numerics::FitResult& f, const std::vector<std::string>& names) {
  nlohmann::json j;
  for (std::size_t k = 0; k < names.size(); ++k) {
    j["params"][names[k]] = f.params[static_cast<Eigen::Index>(k)];
    j["std_errors"][names[k]] = f.std_error(static_cast<int>(k));
  }
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < f.covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < f.covariance.cols(); ++k) row.push_back(f.covariance(i, k));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["r_squared"] = f.r_squared;
  j["converged"] = f.converged;
  return j;
}

// Least squares for y = c0 + c1 cos(w x) + c2 sin(w x) at fixed w.
struct SinusoidLs {
  double offset = 0.0;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
  double residual = 0.0;
};

inline SinusoidLs fit_sinusoid_fixed(const std::vector<double>& x, const std::vector<double>& y, double w) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  if (n < 3) throw ConfigError("sinusoid fit: need at least three points");
  RMat a(n, 3);
  RVec b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(w * x[i]);
    a(i, 2) = std::sin(w * x[i]);
    b[i] = y[i];
  }
  const RVec c = a.colPivHouseholderQr().solve(b);
  return {c[0], c[1], c[2], (a * c - b).squaredNorm()};
}

// Damped sinusoid (offset + amplitude e^{-decay x} cos(omega x + phase)),
// started from the best undamped frequency on a grid up to the Nyquist limit.
inline numerics::FitResult fit_damped_sine(const std::vector<double>& x, const std::vector<double>& y,
                                           double omega_hint = 0.0) {
  const double span = x.back() - x.front();
  if (!(span > 0.0)) throw ConfigError("damped sine fit: empty abscissa span");
  const double nyquist = units::pi * static_cast<double>(x.size() - 1) / span;
  double best_w = omega_hint, best_r = std::numeric_limits<double>::infinity();
  SinusoidLs best{};
  const int grid = 400;
  for (int k = 1; k <= grid; ++k) {
    const double w = nyquist * k / grid;
    const auto s = fit_sinusoid_fixed(x, y, w);
    if (s.residual < best_r) {
      best_r = s.residual;
      best_w = w;
      best = s;
    }
  }
  if (omega_hint > 0.0) {
    const auto s = fit_sinusoid_fixed(x, y, omega_hint);
    if (s.residual <= best_r * 1.0000001) {
      best_w = omega_hint;
      best = s;
    }
  }
  RVec p0(5);
  p0 << best.offset, std::hypot(best.cos_coef, best.sin_coef), 0.0, best_w, std::atan2(-best.sin_coef, best.cos_coef);
  return numerics::nlls_fit(numerics::damped_sine_model(), x, y, p0);
}

// y = offset + amplitude exp(-(x - center)^2 / (2 width^2)), started at the
// sample maximum.
inline numerics::FitResult fit_gaussian_peak(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 5) throw ConfigError("gaussian fit: need at least five points");
  const auto mx = std::max_element(y.begin(), y.end());
  const double lo = *std::min_element(y.begin(), y.end());
  const auto k = static_cast<std::size_t>(mx - y.begin());
  double above = 0.0;
  for (double v : y) above += v - lo;
  const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  const double width = std::max(dx, above * dx / ((*mx - lo) * std::sqrt(units::two_pi) + 1e-300));
  RVec p0(4);
  p0 << lo, *mx - lo, x[k], width;
  return numerics::nlls_fit(numerics::gaussian_model(), x, y, p0);
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  RMat covariance = RMat::Zero(2, 2);
  double max_residual = 0.0;
  // x where the line reaches y, with a delta-method standard error.
  double solve(double y) const { return (y - intercept) / slope; }
  double solve_error(double y) const {
    const double x = solve(y);
    RVec g(2);
    g << -1.0 / slope, -x / slope;
    return std::sqrt(std::max(0.0, g.dot(covariance * g)));
  }
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  if (n < 2) throw ConfigError("line fit: need at least two points");
  RMat a(n, 2);
  RVec b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = x[i];
    b[i] = y[i];
  }
  const RVec c = a.colPivHouseholderQr().solve(b);
  LineFit f{c[0], c[1]};
  const RVec r = a * c - b;
  f.max_residual = r.cwiseAbs().maxCoeff();
  const double s2 = n > 2 ? r.squaredNorm() / static_cast<double>(n - 2) : 0.0;
  f.covariance = s2 * RMat((a.transpose() * a).inverse());
  return f;
}

// Vertex of the quadratic through the samples around index k (five points
// where available), clamped to the sampled interval.
inline double local_quadratic_extremum(const std::vector<double>& x, const std::vector<double>& y, std::size_t k) {
  const std::size_t lo = k >= 2 ? k - 2 : 0, hi = std::min(x.size() - 1, k + 2);
  if (hi - lo < 2) return x[k];
  const Eigen::Index n = static_cast<Eigen::Index>(hi - lo + 1);
  const double h = x[hi] - x[lo];
  RMat a(n, 3);
  RVec b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (x[lo + static_cast<std::size_t>(i)] - x[k]) / h;
    a(i, 0) = 1.0;
    a(i, 1) = u;
    a(i, 2) = u * u;
    b[i] = y[lo + static_cast<std::size_t>(i)];
  }
  const RVec c = a.colPivHouseholderQr().solve(b);
  if (c[2] == 0.0) return x[k];
  return std::clamp(x[k] - 0.5 * h * c[1] / c[2], x[lo], x[hi]);
}

// Continuous phase along a sequence of wrapped phases.
inline std::vector<double> unwrap(const std::vector<double>& wrapped) {
  std::vector<double> out(wrapped.size());
  for (std::size_t i = 0; i < wrapped.size(); ++i)
    out[i] = i == 0 ? wrapped[0] : out[i - 1] + std::remainder(wrapped[i] - out[i - 1], units::two_pi);
  return out;
}

// Wrapped to (-pi, pi].
inline double wrap_phase(double x) {
  double r = std::remainder(x, units::two_pi);
  if (r <= -units::pi) r += units::two_pi;
  return r;
}

}  // namespace fgge::calib
