#pragma once

#include <cmath>

#include "fgge/core/errors.hpp"
#include "fgge/core/units.hpp"

namespace fgge::pulse {

enum class Transmon { A, B };
enum class Transition { GE, EF };

inline const char* name(Transmon q) { return q == Transmon::A ? "A" : "B"; }
inline const char* name(Transition t) { return t == Transition::GE ? "ge" : "ef"; }

namespace detail {
// Offset-subtracted Gaussian rising from 0 at u = 0 to 1 at u = width.
inline double rising_edge(double u, double sigma, double width) {
  const double floor = std::exp(-0.5 * (width / sigma) * (width / sigma));
  const double d = (u - width) / sigma;
  return (std::exp(-0.5 * d * d) - floor) / (1.0 - floor);
}
inline double rising_edge_derivative(double u, double sigma, double width) {
  const double floor = std::exp(-0.5 * (width / sigma) * (width / sigma));
  const double d = (u - width) / sigma;
  return -d / sigma * std::exp(-0.5 * d * d) / (1.0 - floor);
}
}  // namespace detail

// fg-ge drive: Gaussian edges truncated at 3 sigma around a flat plateau.
struct FlatTopPulse {
  double amplitude = 1.0;  // normalized drive amplitude
  double omega = 0.0;      // plateau drive amplitude Omega, rad/s
  double carrier = 0.0;    // rad/s
  double phase = 0.0;      // rad
  double plateau = 0.0;    // s
  double sigma = units::ns(5.0);

  double edge() const { return 3.0 * sigma; }
  double duration() const { return plateau + 2.0 * edge(); }

  // Envelope as a fraction of the plateau, in [0, 1].
  double shape(double t) const {
    const double T = duration();
    if (t <= 0.0 || t >= T) return 0.0;
    if (t < edge()) return detail::rising_edge(t, sigma, edge());
    if (t > T - edge()) return detail::rising_edge(T - t, sigma, edge());
    return 1.0;
  }
  double envelope(double t) const { return omega * shape(t); }

  void validate() const {
    if (!(plateau >= 0.0)) throw ConfigError("FlatTopPulse: plateau must be non-negative");
    if (!(sigma > 0.0)) throw ConfigError("FlatTopPulse: sigma must be positive");
    if (!(omega >= 0.0)) throw ConfigError("FlatTopPulse: amplitude must be non-negative");
    if (!(carrier > 0.0)) throw ConfigError("FlatTopPulse: carrier must be positive");
  }
};

inline double envelope_eval(const FlatTopPulse& p, double t) { return p.envelope(t); }

// Single-transmon Gaussian pulse with a derivative quadrature. The in-phase
// area times the transition matrix element equals the rotation angle.
struct DragPulse {
  Transmon target = Transmon::A;
  Transition transition = Transition::GE;
  double angle = units::pi;  // rad
  double axis = 0.0;         // rad, 0 = X, pi/2 = Y
  double sigma = units::ns(5.0);
  double length = units::ns(20.0);
  double beta = 0.5;
  double detuning = 0.0;     // carrier offset from the transition, rad/s

  double duration() const { return length; }

  double shape(double t) const {
    if (t <= 0.0 || t >= length) return 0.0;
    const double h = 0.5 * length;
    return detail::rising_edge(t < h ? t : length - t, sigma, h);
  }
  double shape_derivative(double t) const {
    if (t <= 0.0 || t >= length) return 0.0;
    const double h = 0.5 * length;
    return t < h ? detail::rising_edge_derivative(t, sigma, h) : -detail::rising_edge_derivative(length - t, sigma, h);
  }
  // Integral of shape over the pulse.
  double shape_area() const {
    const double h = 0.5 * length;
    const double floor = std::exp(-0.5 * (h / sigma) * (h / sigma));
    const double gauss = sigma * std::sqrt(units::two_pi) * std::erf(h / (sigma * std::sqrt(2.0)));
    return (gauss - floor * length) / (1.0 - floor);
  }
  // In-phase amplitude (rad/s) for a transition with relative matrix element
  // lambda, and the matching quadrature for anharmonicity alpha.
  double in_phase(double t, double lambda) const { return angle / (lambda * shape_area()) * shape(t); }
  double quadrature(double t, double lambda, double alpha) const {
    if (beta == 0.0) return 0.0;
    return -beta * angle / (lambda * shape_area()) * shape_derivative(t) / alpha;
  }

  void validate() const {
    if (!(sigma > 0.0) || !(length > 0.0)) throw ConfigError("DragPulse: sigma and length must be positive");
  }
};

}  // namespace fgge::pulse
