#include <algorithm>
#include <limits>

#include "doctest.h"
#include "mwpose/canonicalize.hpp"
#include "mwpose/errors.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/rotation.hpp"
#include "support/synthetic.hpp"

using namespace mwpose;

namespace {

struct Footprint {
  double extent_x = 0.0;
  double extent_y = 0.0;
  double slab_plus_x = 0.0;  // weight within 10% of the +x boundary
};

Footprint measure(const GeometrySet& set) {
  const SampleArrays& s = set.samples;
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (std::size_t i = 0; i < s.size(); ++i) {
    xmin = std::min(xmin, s.px[i]);
    xmax = std::max(xmax, s.px[i]);
    ymin = std::min(ymin, s.py[i]);
    ymax = std::max(ymax, s.py[i]);
  }
  Footprint f;
  f.extent_x = xmax - xmin;
  f.extent_y = ymax - ymin;
  const double lo = xmax - 0.1 * f.extent_x;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.px[i] >= lo) f.slab_plus_x += s.w[i];
  }
  return f;
}

// Reference answer: try all four quarter turns, keep those that put the
// longer extent along x, and among them take the heaviest +x boundary slab.
// Ascending order with strict improvement resolves ties to the smaller turn.
int exhaustive_quarter(const GeometrySet& set, const FrameConfig& frame) {
  int best_k = -1;
  double best_slab = -1.0;
  for (int k = 0; k < 4; ++k) {
    const GeometrySet turned = apply_rotation(set, quarter_turn(frame.z(), k));
    const Footprint f = measure(turned);
    if (f.extent_x + 1e-9 < f.extent_y) continue;
    if (f.slab_plus_x > best_slab + 1e-9) {
      best_slab = f.slab_plus_x;
      best_k = k;
    }
  }
  return best_k;
}

bool is_identity(const RotationMatrix3& r) {
  for (int i = 0; i < 9; ++i) {
    if (r.m[i] != (i % 4 == 0 ? 1.0 : 0.0)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("canonicalize");

TEST_CASE("already canonical scene needs no turn") {
  testsup::BoxSpec spec;
  spec.end_wall_bonus = 2.0;
  const GeometrySet set = testsup::box_set(spec);
  const Canonicalization out = canonicalize_quadrant(set, FrameConfig{});
  CHECK(out.quarter_turns == 0);
  CHECK(is_identity(out.rotation));
  CHECK(out.extent_x == doctest::Approx(8.0));
  CHECK(out.extent_y == doctest::Approx(5.0));
  CHECK(out.slab_weight_high > out.slab_weight_low);
  CHECK_FALSE(out.extents_ambiguous);
  CHECK_FALSE(out.slabs_ambiguous);
}

TEST_CASE("long side along y turns back onto x with the heavy end forward") {
  testsup::BoxSpec spec;
  spec.end_wall_bonus = 2.0;
  spec.gamma_deg = 90.0;  // heavy wall now faces +y
  const GeometrySet set = testsup::box_set(spec);
  const Canonicalization out = canonicalize_quadrant(set, FrameConfig{});
  CHECK(out.quarter_turns == 3);
  CHECK(out.extent_x == doctest::Approx(5.0));
  CHECK(out.extent_y == doctest::Approx(8.0));

  const GeometrySet turned = apply_rotation(set, out.rotation);
  const Footprint f = measure(turned);
  CHECK(f.extent_x == doctest::Approx(8.0));
  CHECK(f.extent_y == doctest::Approx(5.0));
  const Footprint reversed =
      measure(apply_rotation(set, quarter_turn(FrameConfig{}.z(), 1)));
  CHECK(f.slab_plus_x > reversed.slab_plus_x);
}

TEST_CASE("flipped heavy end takes a half turn") {
  testsup::BoxSpec spec;
  spec.end_wall_bonus = 2.0;
  spec.gamma_deg = 180.0;  // heavy wall now faces -x
  const GeometrySet set = testsup::box_set(spec);
  const Canonicalization out = canonicalize_quadrant(set, FrameConfig{});
  CHECK(out.quarter_turns == 2);
  CHECK(out.slab_weight_low > out.slab_weight_high);
}

TEST_CASE("quarter turn choice matches the exhaustive slab comparison") {
  const FrameConfig frame;
  for (const double bonus : {2.0, 0.5}) {
    for (const double gamma : {0.0, 90.0, 180.0, 270.0}) {
      CAPTURE(bonus);
      CAPTURE(gamma);
      testsup::BoxSpec spec;
      spec.end_wall_bonus = bonus;
      spec.gamma_deg = gamma;
      const GeometrySet set = testsup::box_set(spec);
      const Canonicalization out = canonicalize_quadrant(set, frame);
      CHECK(out.quarter_turns == exhaustive_quarter(set, frame));

      const Footprint f = measure(apply_rotation(set, out.rotation));
      CHECK(f.extent_x >= f.extent_y);
    }
  }
}

TEST_CASE("square footprint keeps the pose and flags the ambiguity") {
  testsup::BoxSpec spec;
  spec.w = 5.0;
  spec.d = 5.0;
  const GeometrySet set = testsup::box_set(spec);
  const Canonicalization out = canonicalize_quadrant(set, FrameConfig{});
  CHECK(out.quarter_turns == 0);
  CHECK(is_identity(out.rotation));
  CHECK(out.extents_ambiguous);
  CHECK(out.slabs_ambiguous);
  CHECK(out.slab_weight_low == doctest::Approx(out.slab_weight_high));
}

TEST_CASE("empty sample set is an error") {
  GeometrySet empty;
  try {
    canonicalize_quadrant(empty, FrameConfig{});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_geometry);
  }
}

TEST_SUITE_END();
