#pragma once

#include <cmath>
#include <numbers>

// Angles cross public interfaces in degrees; trigonometry runs in radians.
namespace flexinst {

constexpr double deg_to_rad(double deg) noexcept { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / std::numbers::pi); }

/// Wraps an angle to [0, 360).
inline double wrap_degrees(double deg) noexcept {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

}  // namespace flexinst
