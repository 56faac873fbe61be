#include "mwpose/canonicalize.hpp"

#include <cmath>
#include <vector>

#include "mwpose/errors.hpp"
#include "mwpose/kernels.hpp"
#include "mwpose/parallel.hpp"

namespace mwpose {

Canonicalization canonicalize_quadrant(const GeometrySet& set, const FrameConfig& frame,
                                       int threads) {
  const SampleArrays& s = set.samples;
  const std::size_t n = s.size();
  if (n == 0) fail(errc::empty_geometry, "cannot canonicalize an empty sample set");

  const kernels::Backend& k = kernels::active();
  std::vector<double> u(n), v(n);
  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    k.dot_axis(s.px.data() + begin, s.py.data() + begin, s.pz.data() + begin, end - begin,
               frame.x().vec(), u.data() + begin);
    k.dot_axis(s.px.data() + begin, s.py.data() + begin, s.pz.data() + begin, end - begin,
               frame.y().vec(), v.data() + begin);
  });

  double umin, umax, vmin, vmax;
  k.minmax(u.data(), n, &umin, &umax);
  k.minmax(v.data(), n, &vmin, &vmax);

  Canonicalization out;
  out.extent_x = umax - umin;
  out.extent_y = vmax - vmin;
  const double larger = std::max(out.extent_x, out.extent_y);
  out.extents_ambiguous =
      larger > 0.0 && std::fabs(out.extent_x - out.extent_y) < 0.01 * larger;

  // The two quarter turns that keep the longer extent along x differ by 180
  // degrees; they swap which end of that extent faces +x. Weigh both 10%
  // boundary slabs and turn the heavier one toward +x.
  if (out.extent_x >= out.extent_y) {
    const double slab = 0.1 * out.extent_x;
    out.slab_weight_low = k.slab_weight(u.data(), s.w.data(), n, umin, umin + slab);
    out.slab_weight_high = k.slab_weight(u.data(), s.w.data(), n, umax - slab, umax);
    out.quarter_turns = out.slab_weight_high >= out.slab_weight_low ? 0 : 2;
  } else {
    const double slab = 0.1 * out.extent_y;
    out.slab_weight_low = k.slab_weight(v.data(), s.w.data(), n, vmin, vmin + slab);
    out.slab_weight_high = k.slab_weight(v.data(), s.w.data(), n, vmax - slab, vmax);
    out.quarter_turns = out.slab_weight_low >= out.slab_weight_high ? 1 : 3;
  }
  out.slabs_ambiguous = std::fabs(out.slab_weight_high - out.slab_weight_low) <
                        0.01 * (out.slab_weight_high + out.slab_weight_low);
  out.rotation = quarter_turn(frame.z(), out.quarter_turns);
  return out;
}

}  // namespace mwpose
