#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mwpose/vec3.hpp"

// Batch kernels for the per-sample inner loops: axis dot products, the folded
// angle computations feeding the histogram and the sphere grid, rotation
// application and a few reductions. Every kernel exists as a scalar reference
// and (on x86-64 with AVX2+FMA) a vectorized variant selected at runtime.
//
// The variants are required to produce BIT-IDENTICAL outputs: the scalar
// reference performs, per element, exactly the IEEE operation sequence of one
// SIMD lane (fused multiply-adds written as std::fma, reductions striped over
// four accumulators). Tests assert equality with ==, not a tolerance.
namespace mwpose::kernels {

struct Backend {
  const char* name;

  // out[i] = <n_i, axis>
  void (*dot_axis)(const double* x, const double* y, const double* z, std::size_t n,
                   const Vec3& axis, double* out);

  // Signed angle of each normal's horizontal projection against the frame x
  // axis (clockwise-positive around z, degrees in [-180,180)), plus the same
  // angle folded to [0,90). ax/ay are the frame's x and y axes.
  void (*horizontal_angles)(const double* nx, const double* ny, const double* nz, std::size_t n,
                            const Vec3& ax, const Vec3& ay, double* raw_deg, double* folded_deg);

  // Folded azimuth [0,90) (the 90-boundary clamped into the top cell, pole
  // convention applied) and folded inclination [0,90] of each normal, plus
  // <n, z> for upward flipping. Antipodal inputs produce bit-identical
  // outputs by construction (only |<n,.>| enters the computation).
  void (*sphere_fold)(const double* nx, const double* ny, const double* nz, std::size_t n,
                      const Vec3& ax, const Vec3& ay, const Vec3& az, double* phi_folded,
                      double* theta_folded, double* z_dot);

  // (ox,oy,oz)_i = R * (x,y,z)_i with row-major R.
  void (*rotate3)(const double* x, const double* y, const double* z, std::size_t n,
                  const double R[9], double* ox, double* oy, double* oz);

  void (*minmax)(const double* v, std::size_t n, double* mn, double* mx);

  // Striped 4-accumulator sums; combine order (a0+a2)+(a1+a3).
  double (*weighted_sum)(const double* w, std::size_t n);
  // Sum of w[i] where lo <= coord[i] <= hi (both inclusive).
  double (*slab_weight)(const double* coord, const double* w, std::size_t n, double lo, double hi);
};

const Backend& scalar_backend();
const Backend* avx2_backend();  // nullptr when not compiled in or not supported by this CPU

// Active backend used by the library. Defaults to the widest supported one.
const Backend& active();
// name: "scalar", "avx2" or "auto"; returns false if unavailable.
bool select(const std::string& name);
std::vector<const Backend*> available();

}  // namespace mwpose::kernels
