#pragma once

#include <cmath>

#include "mwpose/rotation.hpp"
#include "mwpose/vec3.hpp"

namespace mwpose {

// User-chosen vertical axis z and horizontal reference axis x; y is always
// derived as z x x so the frame is right-handed.
class FrameConfig {
public:
  FrameConfig() : FrameConfig(UnitVec3::trusted({0, 0, 1}), UnitVec3::trusted({1, 0, 0})) {}

  FrameConfig(const UnitVec3& z_axis, const UnitVec3& x_axis)
      : z_(z_axis), x_(x_axis), y_(UnitVec3::of(cross(z_axis, x_axis))) {
    if (std::fabs(dot(z_, x_)) > 1e-6)
      fail(errc::bad_config, "frame axes z and x must be orthogonal");
  }

  static FrameConfig standard() { return FrameConfig(); }

  const UnitVec3& z() const { return z_; }
  const UnitVec3& x() const { return x_; }
  const UnitVec3& y() const { return y_; }

private:
  UnitVec3 z_, x_, y_;
};

}  // namespace mwpose
