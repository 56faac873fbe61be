#include <cmath>
#include <limits>

#include "kernels/atan_poly.hpp"
#include "mwpose/kernels.hpp"

namespace mwpose::kernels {
namespace {

void dot_axis_scalar(const double* x, const double* y, const double* z, std::size_t n,
                     const Vec3& axis, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = detail::dot3(x[i], y[i], z[i], axis.x, axis.y, axis.z);
}

void horizontal_angles_scalar(const double* nx, const double* ny, const double* nz,
                              std::size_t n, const Vec3& ax, const Vec3& ay, double* raw_deg,
                              double* folded_deg) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = detail::dot3(nx[i], ny[i], nz[i], ax.x, ax.y, ax.z);
    const double b = detail::dot3(nx[i], ny[i], nz[i], ay.x, ay.y, ay.z);
    detail::horizontal_one(a, b, &raw_deg[i], &folded_deg[i]);
  }
}

void sphere_fold_scalar(const double* nx, const double* ny, const double* nz, std::size_t n,
                        const Vec3& ax, const Vec3& ay, const Vec3& az, double* phi_folded,
                        double* theta_folded, double* z_dot) {
  for (std::size_t i = 0; i < n; ++i) {
    const double a = detail::dot3(nx[i], ny[i], nz[i], ax.x, ax.y, ax.z);
    const double b = detail::dot3(nx[i], ny[i], nz[i], ay.x, ay.y, ay.z);
    const double c = detail::dot3(nx[i], ny[i], nz[i], az.x, az.y, az.z);
    detail::sphere_one(a, b, c, &phi_folded[i], &theta_folded[i]);
    z_dot[i] = c;
  }
}

void rotate3_scalar(const double* x, const double* y, const double* z, std::size_t n,
                    const double R[9], double* ox, double* oy, double* oz) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i], yi = y[i], zi = z[i];  // read before any aliased write
    ox[i] = detail::dot3(xi, yi, zi, R[0], R[1], R[2]);
    oy[i] = detail::dot3(xi, yi, zi, R[3], R[4], R[5]);
    oz[i] = detail::dot3(xi, yi, zi, R[6], R[7], R[8]);
  }
}

void minmax_scalar(const double* v, std::size_t n, double* mn, double* mx) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo[4] = {inf, inf, inf, inf};
  double hi[4] = {-inf, -inf, -inf, -inf};
  for (std::size_t i = 0; i < n; ++i) {
    const double val = v[i];
    const std::size_t lane = i % 4;
    lo[lane] = (lo[lane] < val) ? lo[lane] : val;
    hi[lane] = (hi[lane] > val) ? hi[lane] : val;
  }
  const double l02 = (lo[0] < lo[2]) ? lo[0] : lo[2];
  const double l13 = (lo[1] < lo[3]) ? lo[1] : lo[3];
  *mn = (l02 < l13) ? l02 : l13;
  const double h02 = (hi[0] > hi[2]) ? hi[0] : hi[2];
  const double h13 = (hi[1] > hi[3]) ? hi[1] : hi[3];
  *mx = (h02 > h13) ? h02 : h13;
}

double weighted_sum_scalar(const double* w, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) acc[i % 4] += w[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double slab_weight_scalar(const double* coord, const double* w, std::size_t n, double lo,
                          double hi) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double add = (coord[i] >= lo && coord[i] <= hi) ? w[i] : 0.0;
    acc[i % 4] += add;
  }
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",          dot_axis_scalar, horizontal_angles_scalar, sphere_fold_scalar,
      rotate3_scalar,    minmax_scalar,   weighted_sum_scalar,      slab_weight_scalar,
  };
  return backend;
}

}  // namespace mwpose::kernels
