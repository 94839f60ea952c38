#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fgge::numerics {

struct ScalarRoot {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Brent's method. Requires a sign change on [a, b].
template <class F>
ScalarRoot root_find_scalar(F&& f, double a, double b, double tol = 1e-12, int max_iter = 100) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return {a, fa, 0, true};
  if (fb == 0.0) return {b, fb, 0, true};
  if ((fa > 0.0) == (fb > 0.0)) throw std::domain_error("root_find_scalar: no sign change on bracket");
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool bisected = true;
  ScalarRoot r;
  for (int it = 1; it <= max_iter; ++it) {
    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double lo = std::min((3.0 * a + b) / 4.0, b), hi = std::max((3.0 * a + b) / 4.0, b);
    const bool reject = s < lo || s > hi || (bisected && std::abs(s - b) >= std::abs(b - c) / 2.0) ||
                        (!bisected && std::abs(s - b) >= std::abs(c - d) / 2.0) ||
                        (bisected && std::abs(b - c) < tol) || (!bisected && std::abs(c - d) < tol);
    if (reject) {
      s = 0.5 * (a + b);
      bisected = true;
    } else {
      bisected = false;
    }
    const double fs = f(s);
    d = c;
    c = b;
    fc = fb;
    if ((fa > 0.0) != (fs > 0.0)) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
    r = {b, fb, it, false};
    if (fb == 0.0 || std::abs(b - a) < tol) {
      r.converged = true;
      return r;
    }
  }
  return r;
}

struct ScalarMin {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
  // Set when every sampled value agrees to within flat_tol, i.e. the
  // location of the minimum is not resolved by the function values.
  bool low_confidence = false;
};

template <class F>
ScalarMin golden_section_min(F&& f, double a, double b, double tol, int max_iter = 100,
                             double flat_tol = 1e-12) {
  if (a > b) std::swap(a, b);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  double fmin = std::min(fc, fd), fmax = std::max(fc, fd);
  int it = 0;
  while (std::abs(b - a) > tol && it < max_iter) {
    ++it;
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
      fmin = std::min(fmin, fc);
      fmax = std::max(fmax, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
      fmin = std::min(fmin, fd);
      fmax = std::max(fmax, fd);
    }
  }
  ScalarMin r;
  if (fc < fd) {
    r.x = c;
    r.fx = fc;
  } else {
    r.x = d;
    r.fx = fd;
  }
  r.iterations = it;
  r.converged = std::abs(b - a) <= tol;
  const double scale = std::max({std::abs(fmin), std::abs(fmax), 1e-300});
  r.low_confidence = (fmax - fmin) <= flat_tol * scale;
  return r;
}

}  // namespace fgge::numerics
