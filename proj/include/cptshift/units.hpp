#pragma once

// Frequencies are carried as angular rates (rad/s) everywhere inside the
// library. These helpers convert at the boundaries.

#include <numbers>

namespace cptshift {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double from_hz(double f) { return two_pi * f; }
constexpr double from_khz(double f) { return two_pi * 1e3 * f; }
constexpr double from_mhz(double f) { return two_pi * 1e6 * f; }
constexpr double from_ghz(double f) { return two_pi * 1e9 * f; }

constexpr double to_hz(double w) { return w / two_pi; }
constexpr double to_mhz(double w) { return w / (two_pi * 1e6); }

} // namespace cptshift
