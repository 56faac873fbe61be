#pragma once

#include <array>
#include <cmath>

#include "mwpose/vec3.hpp"

namespace mwpose {

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

// Row-major 3x3 rotation matrix.
struct RotationMatrix3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static RotationMatrix3 identity() { return {}; }

  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  RotationMatrix3 operator*(const RotationMatrix3& o) const {
    RotationMatrix3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        r.m[3 * i + j] =
            m[3 * i] * o.m[j] + m[3 * i + 1] * o.m[3 + j] + m[3 * i + 2] * o.m[6 + j];
    return r;
  }

  RotationMatrix3 transposed() const {
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  // Orthonormality + det(+1) check against the given tolerance.
  bool is_rotation(double tol = 1e-9) const {
    const RotationMatrix3 p = *this * transposed();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double want = (i == j) ? 1.0 : 0.0;
        if (std::fabs(p(i, j) - want) > tol) return false;
      }
    return std::fabs(determinant() - 1.0) <= tol;
  }
};

// Smallest angle between two unit vectors, in degrees [0,180].
inline double angle_between(const UnitVec3& a, const UnitVec3& b) {
  double c = dot(a, b);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return rad_to_deg(std::acos(c));
}

// Signed angle of v against ref when looking along axis, in degrees [-180,180).
// v must lie in the plane orthogonal to axis (callers project first); the
// formula is scale-invariant in v, so the projected vector can be passed
// without renormalizing.
//
// Sign convention (fixed, property-tested): for unit v perpendicular to axis,
//   signed_angle_around_axis(rotation_about_axis(axis, t).apply(v), v, axis) == -t
// i.e. this angle runs clockwise around the axis while Rodrigues rotation runs
// counterclockwise.
inline double signed_angle_around_axis(const Vec3& v, const UnitVec3& ref, const UnitVec3& axis) {
  if (norm(v) < 1e-12) fail(errc::degenerate_vector, "signed angle of near-zero vector");
  double deg = rad_to_deg(std::atan2(dot(axis, cross(v, ref)), dot(v, ref)));
  if (deg >= 180.0 || deg < -180.0) deg = -180.0;
  return deg;
}

inline Vec3 project_onto_plane(const Vec3& n, const UnitVec3& z) { return n - dot(n, z) * z.vec(); }

// Rodrigues rotation about a unit axis; positive angles follow the right-hand
// rule (rotation_about_axis(z, 90) maps x to y).
inline RotationMatrix3 rotation_about_axis(const UnitVec3& axis, double angle_deg) {
  const double a = deg_to_rad(angle_deg);
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double t = 1.0 - c;
  const double x = axis.x(), y = axis.y(), z = axis.z();
  RotationMatrix3 r;
  r.m = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
         t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
         t * x * z - s * y, t * y * z + s * x, t * z * z + c};
  return r;
}

// Exact quarter-turn about a unit axis (k in any integer range; reduced mod 4).
// Uses exact {0, +-1} trig values so the matrix entries stay exact where the
// axis components are exact, which canonicalization relies on.
inline RotationMatrix3 quarter_turn(const UnitVec3& axis, int k) {
  k = ((k % 4) + 4) % 4;
  static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
  static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
  const double c = kCos[k], s = kSin[k], t = 1.0 - c;
  const double x = axis.x(), y = axis.y(), z = axis.z();
  RotationMatrix3 r;
  r.m = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
         t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
         t * x * z - s * y, t * y * z + s * x, t * z * z + c};
  return r;
}

// Minimal rotation carrying `from` onto `to` (axis = from x to). Stable form
// R = I + [w]x + [w]x^2 / (1+c); undefined as c -> -1, hence the antipodal
// guard at 179 degrees (far outside the +-30 degree leveling regime).
inline RotationMatrix3 rotation_aligning(const UnitVec3& from, const UnitVec3& to) {
  const double c = dot(from, to);
  if (angle_between(from, to) >= 179.0)
    fail(errc::antipodal_input, "rotation_aligning: vectors are near-antipodal");
  const Vec3 w = cross(from, to);
  const double k = 1.0 / (1.0 + c);
  RotationMatrix3 r;
  r.m = {1.0 - k * (w.y * w.y + w.z * w.z), k * w.x * w.y - w.z,               k * w.x * w.z + w.y,
         k * w.x * w.y + w.z,               1.0 - k * (w.x * w.x + w.z * w.z), k * w.y * w.z - w.x,
         k * w.x * w.z - w.y,               k * w.y * w.z + w.x,               1.0 - k * (w.x * w.x + w.y * w.y)};
  return r;
}

}  // namespace mwpose
