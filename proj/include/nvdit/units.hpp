#pragma once

#include <cmath>

// Unit conventions used throughout:
//   - time in nanoseconds
//   - angular frequency in rad/ns  (omega = two_pi * f, f in GHz)
//   - magnetic field in tesla
// All user-facing output converts back to ordinary frequency (GHz) and ns.

namespace nvdit {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// ordinary frequency in GHz -> angular frequency in rad/ns
constexpr double ghz(double f) { return two_pi * f; }

// angular frequency in rad/ns -> ordinary frequency in GHz
constexpr double to_ghz(double w) { return w / two_pi; }

} // namespace nvdit
