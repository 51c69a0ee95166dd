#pragma once

#include <Eigen/Core>
#include <numbers>

namespace conefreq {

using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = std::numbers::pi;

// Polar angle in [0, 2*pi).
inline double polar_angle(const Vec2& x) {
  double t = std::atan2(x.y(), x.x());
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace conefreq
