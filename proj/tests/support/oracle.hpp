#pragma once

#include <cmath>

#include "mwpose/horizontal.hpp"
#include "mwpose/rotation.hpp"
#include "mwpose/vertical.hpp"

// Brute-force minimizers of the two alignment objectives. They are slow and
// obviously correct; the grid/median estimators are tested against them.
namespace testsup {

using namespace mwpose;

// Distance between two angles modulo 90 degrees, in [0,45].
inline double mod90_distance(double a, double b) {
  double r = std::fabs(a - b);
  r -= 90.0 * std::floor(r / 90.0);
  return std::min(r, 90.0 - r);
}

// Sum of weighted angular distances of every folded horizontal angle to the
// candidate fold-space angle g.
inline double horizontal_objective(const HorizontalAngleSet& angles, double g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i)
    sum += angles.weights[i] * mod90_distance(angles.folded[i], g);
  return sum;
}

// Exhaustive scan of the horizontal objective. Returns the minimizing angle
// converted to the counterclockwise gamma convention of align_horizontal.
inline double scan_horizontal_gamma(const GeometrySet& set, const FrameConfig& frame,
                                    double step = 0.01) {
  const HorizontalAngleSet angles = horizontal_angles(filter_horizontal(set, frame), frame);
  double best_g = 0.0;
  double best_f = horizontal_objective(angles, 0.0);
  for (double g = step; g < 90.0; g += step) {
    const double f = horizontal_objective(angles, g);
    if (f < best_f) {
      best_f = f;
      best_g = g;
    }
  }
  return best_g == 0.0 ? 0.0 : 90.0 - best_g;
}

// Sum of weighted angular distances of every vertical-band normal to the
// candidate axis, n and -n treated alike.
inline double vertical_objective(const SampleSubset& subset, const Vec3& axis) {
  double sum = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const double d = std::fabs(subset.nx[i] * axis.x + subset.ny[i] * axis.y +
                               subset.nz[i] * axis.z);
    sum += subset.w[i] * rad_to_deg(std::acos(std::min(1.0, d)));
  }
  return sum;
}

// Exhaustive 2D scan over tilt angles (alpha about x, beta about y) within
// +-bound degrees. Returns the minimizing candidate vertical axis.
inline UnitVec3 scan_vertical_axis(const GeometrySet& set, const FrameConfig& frame,
                                   double bound = 30.0, double step = 0.25) {
  const SampleSubset subset = filter_vertical(set, frame);
  UnitVec3 best = frame.z();
  double best_f = vertical_objective(subset, best.vec());
  for (double alpha = -bound; alpha <= bound + 1e-12; alpha += step) {
    const RotationMatrix3 rx = rotation_about_axis(frame.x(), alpha);
    for (double beta = -bound; beta <= bound + 1e-12; beta += step) {
      const Vec3 axis = rx.apply(rotation_about_axis(frame.y(), beta).apply(frame.z().vec()));
      const double f = vertical_objective(subset, axis);
      if (f < best_f) {
        best_f = f;
        best = UnitVec3::of(axis);
      }
    }
  }
  return best;
}

}  // namespace testsup
