#pragma once

#include <cstdint>

#include "mwpose/frame.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/rotation.hpp"

namespace mwpose {

// Outcome of resolving the 90-degree ambiguity that remains after axis
// alignment. quarter_turns is the number of counterclockwise quarter turns
// about the frame z axis applied on top of the aligned pose.
struct Canonicalization {
  int quarter_turns = 0;
  RotationMatrix3 rotation;       // quarter_turn(z, quarter_turns)
  double extent_x = 0.0;          // aligned bounding extents before the turn
  double extent_y = 0.0;
  double slab_weight_low = 0.0;   // candidate slab weights (heavier one wins)
  double slab_weight_high = 0.0;
  bool extents_ambiguous = false;  // |ex - ey| within 1% of the larger extent
  bool slabs_ambiguous = false;    // slab weights within 1% of their sum
};

// Picks the quarter turn that puts the longer bounding-box side along x and
// the heavier 10%-extent boundary slab toward +x. Ties resolve to the smaller
// turn count. The set is expected to be axis-aligned already; positions are
// read through the frame axes without modifying the set.
Canonicalization canonicalize_quadrant(const GeometrySet& set, const FrameConfig& frame,
                                       int threads = 0);

}  // namespace mwpose
