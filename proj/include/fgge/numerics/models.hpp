#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fgge/numerics/linalg.hpp"

namespace fgge::numerics {

struct ModelFunction {
  std::string name;
  std::vector<std::string> parameter_names;
  std::function<double(const RVec&, double)> eval;
  // Analytic gradient with respect to the parameters. When empty, central
  // finite differences are used.
  std::function<RVec(const RVec&, double)> gradient;
  RVec lower;
  RVec upper;

  int size() const { return static_cast<int>(parameter_names.size()); }

  RVec finite_difference_gradient(const RVec& p, double x) const {
    RVec g(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
      RVec hi = p, lo = p;
      hi[k] += h;
      lo[k] -= h;
      g[k] = (eval(hi, x) - eval(lo, x)) / (2.0 * h);
    }
    return g;
  }

  RVec gradient_at(const RVec& p, double x) const {
    return gradient ? gradient(p, x) : finite_difference_gradient(p, x);
  }

  RVec clamp(RVec p) const {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (lower.size() == p.size()) p[k] = std::max(p[k], lower[k]);
      if (upper.size() == p.size()) p[k] = std::min(p[k], upper[k]);
    }
    return p;
  }
};

namespace detail {
inline RVec unbounded(int n, double sign) {
  return RVec::Constant(n, sign * std::numeric_limits<double>::infinity());
}
inline ModelFunction make_model(std::string name, std::vector<std::string> names,
                                std::function<double(const RVec&, double)> f,
                                std::function<RVec(const RVec&, double)> g) {
  const int n = static_cast<int>(names.size());
  return {std::move(name), std::move(names), std::move(f), std::move(g), unbounded(n, -1.0),
          unbounded(n, 1.0)};
}
}  // namespace detail

// offset + amplitude * exp(-(x - center)^2 / (2 width^2))
inline ModelFunction gaussian_model() {
  return detail::make_model(
      "gaussian", {"offset", "amplitude", "center", "width"},
      [](const RVec& p, double x) {
        const double u = (x - p[2]) / p[3];
        return p[0] + p[1] * std::exp(-0.5 * u * u);
      },
      [](const RVec& p, double x) {
        const double u = (x - p[2]) / p[3];
        const double e = std::exp(-0.5 * u * u);
        RVec g(4);
        g << 1.0, e, p[1] * e * u / p[3], p[1] * e * u * u / p[3];
        return g;
      });
}

// offset + amplitude * exp(-decay x) * cos(omega x + phase)
inline ModelFunction damped_sine_model() {
  return detail::make_model(
      "damped_sine", {"offset", "amplitude", "decay", "omega", "phase"},
      [](const RVec& p, double x) { return p[0] + p[1] * std::exp(-p[2] * x) * std::cos(p[3] * x + p[4]); },
      [](const RVec& p, double x) {
        const double e = std::exp(-p[2] * x);
        const double c = std::cos(p[3] * x + p[4]);
        const double s = std::sin(p[3] * x + p[4]);
        RVec g(5);
        g << 1.0, e * c, -x * p[1] * e * c, -x * p[1] * e * s, -p[1] * e * s;
        return g;
      });
}

// A + B p^x
inline ModelFunction exp_decay_model() {
  return detail::make_model(
      "exp_decay", {"A", "B", "p"},
      [](const RVec& q, double x) { return q[0] + q[1] * std::pow(q[2], x); },
      [](const RVec& q, double x) {
        RVec g(3);
        const double px = std::pow(q[2], x);
        g << 1.0, px, x == 0.0 ? 0.0 : q[1] * x * std::pow(q[2], x - 1.0);
        return g;
      });
}

// p_inf (1 - exp(-Gamma x)) + p0 exp(-Gamma x)
inline ModelFunction leakage_model() {
  return detail::make_model(
      "leakage", {"p0", "p_inf", "Gamma"},
      [](const RVec& q, double x) {
        const double e = std::exp(-q[2] * x);
        return q[1] * (1.0 - e) + q[0] * e;
      },
      [](const RVec& q, double x) {
        const double e = std::exp(-q[2] * x);
        RVec g(3);
        g << e, 1.0 - e, x * e * (q[1] - q[0]);
        return g;
      });
}

// intercept + slope x
inline ModelFunction line_model() {
  return detail::make_model(
      "line", {"intercept", "slope"}, [](const RVec& p, double x) { return p[0] + p[1] * x; },
      [](const RVec&, double x) {
        RVec g(2);
        g << 1.0, x;
        return g;
      });
}

}  // namespace fgge::numerics
