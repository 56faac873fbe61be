#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "mwpose/evaluate.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/rotation.hpp"

// Synthetic scenes with exactly known pose, used by the unit and acceptance
// suites. All randomness goes through TrialRng so every test is reproducible
// from its literal seed.
namespace testsup {

using namespace mwpose;

// grid x grid oriented samples across the parallelogram origin + u*eu + v*ev,
// u,v in (0,1), all with the same normal; total weight split evenly.
inline void append_plane(GeometrySet& set, const Vec3& origin, const Vec3& eu, const Vec3& ev,
                         const Vec3& normal, int grid, double total_weight) {
  const UnitVec3 n = UnitVec3::of(normal);
  const double w = total_weight / (static_cast<double>(grid) * grid);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double u = (i + 0.5) / grid;
      const double v = (j + 0.5) / grid;
      const Vec3 p = origin + eu * u + ev * v;
      set.samples.push_back(p, n.vec(), w, static_cast<std::uint32_t>(set.samples.size()));
    }
  }
}

struct BoxSpec {
  double w = 8.0, d = 5.0, h = 3.0;  // extents along x, y, z
  int grid = 24;                     // samples per face edge
  double gamma_deg = 0.0;            // CCW turn about z baked into the box
  double weight_scale = 1.0;
  double end_wall_bonus = 1.0;  // multiplies the +x end wall weight
};

// Six-face box with exact outward normals and per-face area weights.
inline GeometrySet box_set(const BoxSpec& spec = {}) {
  GeometrySet set;
  const double w = spec.w, d = spec.d, h = spec.h;
  const double s = spec.weight_scale;
  const int g = spec.grid;
  append_plane(set, {0, 0, 0}, {w, 0, 0}, {0, d, 0}, {0, 0, -1}, g, s * w * d);
  append_plane(set, {0, 0, h}, {w, 0, 0}, {0, d, 0}, {0, 0, 1}, g, s * w * d);
  append_plane(set, {0, 0, 0}, {w, 0, 0}, {0, 0, h}, {0, -1, 0}, g, s * w * h);
  append_plane(set, {0, d, 0}, {w, 0, 0}, {0, 0, h}, {0, 1, 0}, g, s * w * h);
  append_plane(set, {0, 0, 0}, {0, d, 0}, {0, 0, h}, {-1, 0, 0}, g, s * d * h);
  append_plane(set, {w, 0, 0}, {0, d, 0}, {0, 0, h}, {1, 0, 0}, g,
               s * spec.end_wall_bonus * d * h);
  if (spec.gamma_deg != 0.0)
    return apply_rotation(set, rotation_about_axis(FrameConfig().z(), spec.gamma_deg));
  return set;
}

inline GeometrySet merge(GeometrySet a, const GeometrySet& b) {
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    a.samples.push_back({b.samples.px[i], b.samples.py[i], b.samples.pz[i]},
                        {b.samples.nx[i], b.samples.ny[i], b.samples.nz[i]}, b.samples.w[i],
                        static_cast<std::uint32_t>(a.samples.size()));
  }
  return a;
}

// Two Manhattan structures: box A axis-aligned, box B turned by frame_b_deg
// and shifted clear of A, with B's weights scaled so the horizontal support
// ratio is support_a : support_b.
inline GeometrySet dual_box_set(double support_a, double support_b, double frame_b_deg,
                                int grid = 24) {
  BoxSpec a;
  a.grid = grid;
  GeometrySet set = box_set(a);
  BoxSpec b;
  b.grid = grid;
  b.gamma_deg = frame_b_deg;
  b.weight_scale = support_b / support_a;
  GeometrySet other = box_set(b);
  for (std::size_t i = 0; i < other.samples.size(); ++i) other.samples.px[i] += 20.0;
  return merge(std::move(set), other);
}

// Horizontal floor (60% of the vertical-band weight) against a 30-degree
// slanted ceiling (40%), plus two walls so the horizontal stage has input.
inline GeometrySet attic_set(int grid = 24) {
  GeometrySet set;
  append_plane(set, {0, 0, 0}, {8, 0, 0}, {0, 5, 0}, {0, 0, 1}, grid, 60.0);
  const RotationMatrix3 slant = rotation_about_axis(FrameConfig().x(), 30.0);
  append_plane(set, {0, 0, 3}, {8, 0, 0}, slant.apply({0, 5, 0}), slant.apply({0, 0, -1}),
               grid, 40.0);
  append_plane(set, {0, 0, 0}, {8, 0, 0}, {0, 0, 3}, {0, -1, 0}, grid, 24.0);
  append_plane(set, {0, 0, 0}, {0, 5, 0}, {0, 0, 3}, {-1, 0, 0}, grid, 15.0);
  return set;
}

inline double gauss(TrialRng& rng) {
  const double u1 = 1.0 - rng.next_unit();  // (0,1]
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline Vec3 random_unit(TrialRng& rng) {
  const double z = 2.0 * rng.next_unit() - 1.0;
  const double azimuth = 2.0 * kPi * rng.next_unit();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(azimuth), r * std::sin(azimuth), z};
}

// Tilts every normal by N(0, sigma) degrees about a random tangent axis.
inline void add_normal_noise(GeometrySet& set, double sigma_deg, TrialRng& rng) {
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const Vec3 n = {set.samples.nx[i], set.samples.ny[i], set.samples.nz[i]};
    Vec3 axis = cross(n, random_unit(rng));
    while (norm(axis) < 1e-6) axis = cross(n, random_unit(rng));
    const RotationMatrix3 tilt =
        rotation_about_axis(UnitVec3::of(axis), sigma_deg * gauss(rng));
    const Vec3 m = tilt.apply(n);
    set.samples.nx[i] = m.x;
    set.samples.ny[i] = m.y;
    set.samples.nz[i] = m.z;
  }
}

// Adds uniformly-directed clutter until it makes up `fraction` of all samples.
// Clutter carries the mean sample weight and random in-bbox positions.
inline void add_clutter(GeometrySet& set, double fraction, TrialRng& rng) {
  const std::size_t n = set.samples.size();
  const auto count = static_cast<std::size_t>(std::lround(fraction / (1.0 - fraction) * n));
  const double w = set.total_weight() / static_cast<double>(n);
  Vec3 mn = {set.samples.px[0], set.samples.py[0], set.samples.pz[0]}, mx = mn;
  for (std::size_t i = 0; i < n; ++i) {
    mn = {std::min(mn.x, set.samples.px[i]), std::min(mn.y, set.samples.py[i]),
          std::min(mn.z, set.samples.pz[i])};
    mx = {std::max(mx.x, set.samples.px[i]), std::max(mx.y, set.samples.py[i]),
          std::max(mx.z, set.samples.pz[i])};
  }
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 p = {mn.x + (mx.x - mn.x) * rng.next_unit(),
                    mn.y + (mx.y - mn.y) * rng.next_unit(),
                    mn.z + (mx.z - mn.z) * rng.next_unit()};
    set.samples.push_back(p, random_unit(rng), w, static_cast<std::uint32_t>(n + i));
  }
}

// Point cloud copy of a sample set, for writing test files to disk.
inline std::shared_ptr<PointCloud> as_cloud(const GeometrySet& set) {
  auto cloud = std::make_shared<PointCloud>();
  std::vector<Vec3> normals;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    cloud->points.push_back({set.samples.px[i], set.samples.py[i], set.samples.pz[i]});
    normals.push_back({set.samples.nx[i], set.samples.ny[i], set.samples.nz[i]});
  }
  cloud->normals = std::move(normals);
  return cloud;
}

}  // namespace testsup
