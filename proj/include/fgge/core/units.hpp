#pragma once

#include <numbers>

namespace fgge::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Frequencies are stored as angular rates in rad/s, times in seconds.
constexpr double ghz(double f) { return two_pi * f * 1e9; }
constexpr double mhz(double f) { return two_pi * f * 1e6; }
constexpr double khz(double f) { return two_pi * f * 1e3; }
constexpr double to_ghz(double w) { return w / (two_pi * 1e9); }
constexpr double to_mhz(double w) { return w / (two_pi * 1e6); }

constexpr double ns(double t) { return t * 1e-9; }
constexpr double us(double t) { return t * 1e-6; }
constexpr double to_ns(double t) { return t * 1e9; }
constexpr double to_us(double t) { return t * 1e6; }

constexpr double deg(double a) { return a * pi / 180.0; }
constexpr double to_deg(double a) { return a * 180.0 / pi; }

}  // namespace fgge::units
