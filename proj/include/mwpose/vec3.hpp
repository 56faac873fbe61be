#pragma once

#include <cmath>

#include "mwpose/errors.hpp"

namespace mwpose {

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v, double eps = 1e-12) {
  const double n = norm(v);
  if (n < eps) fail(errc::degenerate_vector, "cannot normalize near-zero vector");
  return {v.x / n, v.y / n, v.z / n};
}

// Unit-length direction. The factory normalizes; the raw constructor is for
// values already known to be unit length (rotation columns, cross products of
// orthonormal axes).
class UnitVec3 {
public:
  UnitVec3() : v_{0.0, 0.0, 1.0} {}
  static UnitVec3 of(const Vec3& v) { return UnitVec3(normalized(v)); }
  static UnitVec3 trusted(const Vec3& v) { return UnitVec3(v); }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  UnitVec3 operator-() const { return UnitVec3(-v_); }

private:
  explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

}  // namespace mwpose
