#ifndef SIXWHEEL_ANGLES_HPP_
#define SIXWHEEL_ANGLES_HPP_

#include <cmath>
#include <numbers>

namespace sixwheel {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle in degrees into (-180, 180].
inline double wrap_deg(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_ANGLES_HPP_
