// AVX2+FMA variants of the batch kernels. Compiled with -mavx2 -mfma on
// x86-64 only; avx2_backend() additionally gates on runtime CPU support.
// Every loop body is the vector transliteration of the per-element code in
// atan_poly.hpp; tails run that per-element code directly, and reductions
// fold tail elements into the extracted accumulator lanes exactly like the
// scalar backend's i%4 striping. Outputs are bitwise equal to the scalar
// backend by construction and by test.
#include "mwpose/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "kernels/atan_poly.hpp"

namespace mwpose::kernels {
namespace {

const __m256d kSignMask = _mm256_set1_pd(-0.0);

inline __m256d vabs(__m256d v) { return _mm256_andnot_pd(kSignMask, v); }

inline __m256d vcopysign(__m256d mag, __m256d sgn) {
  return _mm256_or_pd(_mm256_andnot_pd(kSignMask, mag), _mm256_and_pd(kSignMask, sgn));
}

inline __m256d dot3v(__m256d x, __m256d y, __m256d z, __m256d vx, __m256d vy, __m256d vz) {
  return _mm256_fmadd_pd(z, vz, _mm256_fmadd_pd(y, vy, _mm256_mul_pd(x, vx)));
}

inline __m256d atan2k_deg_v(__m256d y, __m256d x) {
  const __m256d p = _mm256_max_pd(x, y);
  const __m256d q = _mm256_min_pd(x, y);
  const __m256d r = _mm256_div_pd(q, p);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s_big = _mm256_div_pd(_mm256_sub_pd(r, one), _mm256_add_pd(r, one));
  const __m256d big = _mm256_cmp_pd(r, _mm256_set1_pd(detail::kReduceThreshold), _CMP_GT_OQ);
  const __m256d s = _mm256_blendv_pd(r, s_big, big);
  const __m256d t = _mm256_mul_pd(s, s);
  __m256d acc = _mm256_set1_pd(detail::kAtanCoeff[detail::kAtanCoeffCount - 1]);
  for (int k = detail::kAtanCoeffCount - 2; k >= 0; --k)
    acc = _mm256_fmadd_pd(acc, t, _mm256_set1_pd(detail::kAtanCoeff[k]));
  __m256d a = _mm256_mul_pd(s, acc);
  a = _mm256_blendv_pd(a, _mm256_add_pd(_mm256_set1_pd(45.0), a), big);
  a = _mm256_blendv_pd(a, _mm256_sub_pd(_mm256_set1_pd(90.0), a),
                       _mm256_cmp_pd(y, x, _CMP_GT_OQ));
  return _mm256_blendv_pd(a, _mm256_setzero_pd(),
                          _mm256_cmp_pd(p, _mm256_setzero_pd(), _CMP_EQ_OQ));
}

void dot_axis_avx2(const double* x, const double* y, const double* z, std::size_t n,
                   const Vec3& axis, double* out) {
  const __m256d vx = _mm256_set1_pd(axis.x);
  const __m256d vy = _mm256_set1_pd(axis.y);
  const __m256d vz = _mm256_set1_pd(axis.z);
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4)
    _mm256_storeu_pd(out + i, dot3v(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                                    _mm256_loadu_pd(z + i), vx, vy, vz));
  for (std::size_t i = k; i < n; ++i)
    out[i] = detail::dot3(x[i], y[i], z[i], axis.x, axis.y, axis.z);
}

void horizontal_angles_avx2(const double* nx, const double* ny, const double* nz, std::size_t n,
                            const Vec3& ax, const Vec3& ay, double* raw_deg,
                            double* folded_deg) {
  const __m256d axx = _mm256_set1_pd(ax.x), axy = _mm256_set1_pd(ax.y),
                axz = _mm256_set1_pd(ax.z);
  const __m256d ayx = _mm256_set1_pd(ay.x), ayy = _mm256_set1_pd(ay.y),
                ayz = _mm256_set1_pd(ay.z);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d d90 = _mm256_set1_pd(90.0);
  const __m256d d180 = _mm256_set1_pd(180.0);
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) {
    const __m256d x = _mm256_loadu_pd(nx + i);
    const __m256d y = _mm256_loadu_pd(ny + i);
    const __m256d z = _mm256_loadu_pd(nz + i);
    const __m256d a = dot3v(x, y, z, axx, axy, axz);
    const __m256d b = dot3v(x, y, z, ayx, ayy, ayz);
    const __m256d yp = _mm256_xor_pd(b, kSignMask);
    const __m256d m = atan2k_deg_v(vabs(yp), vabs(a));
    __m256d raw = _mm256_blendv_pd(vcopysign(_mm256_sub_pd(d180, m), yp), vcopysign(m, yp),
                                   _mm256_cmp_pd(a, zero, _CMP_GE_OQ));
    raw = _mm256_blendv_pd(raw, _mm256_set1_pd(-180.0), _mm256_cmp_pd(raw, d180, _CMP_EQ_OQ));
    __m256d f = _mm256_blendv_pd(raw, _mm256_add_pd(raw, d180),
                                 _mm256_cmp_pd(raw, zero, _CMP_LT_OQ));
    f = _mm256_blendv_pd(f, _mm256_sub_pd(f, d90), _mm256_cmp_pd(f, d90, _CMP_GT_OQ));
    f = _mm256_blendv_pd(f, zero, _mm256_cmp_pd(f, d90, _CMP_EQ_OQ));
    _mm256_storeu_pd(raw_deg + i, raw);
    _mm256_storeu_pd(folded_deg + i, f);
  }
  for (std::size_t i = k; i < n; ++i) {
    const double a = detail::dot3(nx[i], ny[i], nz[i], ax.x, ax.y, ax.z);
    const double b = detail::dot3(nx[i], ny[i], nz[i], ay.x, ay.y, ay.z);
    detail::horizontal_one(a, b, &raw_deg[i], &folded_deg[i]);
  }
}

void sphere_fold_avx2(const double* nx, const double* ny, const double* nz, std::size_t n,
                      const Vec3& ax, const Vec3& ay, const Vec3& az, double* phi_folded,
                      double* theta_folded, double* z_dot) {
  const __m256d axx = _mm256_set1_pd(ax.x), axy = _mm256_set1_pd(ax.y),
                axz = _mm256_set1_pd(ax.z);
  const __m256d ayx = _mm256_set1_pd(ay.x), ayy = _mm256_set1_pd(ay.y),
                ayz = _mm256_set1_pd(ay.z);
  const __m256d azx = _mm256_set1_pd(az.x), azy = _mm256_set1_pd(az.y),
                azz = _mm256_set1_pd(az.z);
  const __m256d one = _mm256_set1_pd(1.0);
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) {
    const __m256d x = _mm256_loadu_pd(nx + i);
    const __m256d y = _mm256_loadu_pd(ny + i);
    const __m256d z = _mm256_loadu_pd(nz + i);
    const __m256d ua = vabs(dot3v(x, y, z, axx, axy, axz));
    const __m256d ub = vabs(dot3v(x, y, z, ayx, ayy, ayz));
    const __m256d c = dot3v(x, y, z, azx, azy, azz);
    const __m256d uc = vabs(c);
    __m256d phi = atan2k_deg_v(ua, ub);
    phi = _mm256_blendv_pd(phi, _mm256_set1_pd(90.0),
                           _mm256_cmp_pd(uc, _mm256_set1_pd(detail::kPoleDot), _CMP_GE_OQ));
    phi = _mm256_min_pd(phi, _mm256_set1_pd(detail::kJustBelow90));
    __m256d s2 = _mm256_mul_pd(_mm256_sub_pd(one, uc), _mm256_add_pd(one, uc));
    s2 = _mm256_max_pd(s2, _mm256_setzero_pd());
    const __m256d theta = atan2k_deg_v(_mm256_sqrt_pd(s2), uc);
    _mm256_storeu_pd(phi_folded + i, phi);
    _mm256_storeu_pd(theta_folded + i, theta);
    _mm256_storeu_pd(z_dot + i, c);
  }
  for (std::size_t i = k; i < n; ++i) {
    const double a = detail::dot3(nx[i], ny[i], nz[i], ax.x, ax.y, ax.z);
    const double b = detail::dot3(nx[i], ny[i], nz[i], ay.x, ay.y, ay.z);
    const double c = detail::dot3(nx[i], ny[i], nz[i], az.x, az.y, az.z);
    detail::sphere_one(a, b, c, &phi_folded[i], &theta_folded[i]);
    z_dot[i] = c;
  }
}

void rotate3_avx2(const double* x, const double* y, const double* z, std::size_t n,
                  const double R[9], double* ox, double* oy, double* oz) {
  __m256d r[9];
  for (int e = 0; e < 9; ++e) r[e] = _mm256_set1_pd(R[e]);
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d yi = _mm256_loadu_pd(y + i);
    const __m256d zi = _mm256_loadu_pd(z + i);
    _mm256_storeu_pd(ox + i, dot3v(xi, yi, zi, r[0], r[1], r[2]));
    _mm256_storeu_pd(oy + i, dot3v(xi, yi, zi, r[3], r[4], r[5]));
    _mm256_storeu_pd(oz + i, dot3v(xi, yi, zi, r[6], r[7], r[8]));
  }
  for (std::size_t i = k; i < n; ++i) {
    const double xi = x[i], yi = y[i], zi = z[i];
    ox[i] = detail::dot3(xi, yi, zi, R[0], R[1], R[2]);
    oy[i] = detail::dot3(xi, yi, zi, R[3], R[4], R[5]);
    oz[i] = detail::dot3(xi, yi, zi, R[6], R[7], R[8]);
  }
}

void minmax_avx2(const double* v, std::size_t n, double* mn, double* mx) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  __m256d lov = _mm256_set1_pd(inf);
  __m256d hiv = _mm256_set1_pd(-inf);
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) {
    const __m256d val = _mm256_loadu_pd(v + i);
    lov = _mm256_min_pd(lov, val);
    hiv = _mm256_max_pd(hiv, val);
  }
  double lo[4], hi[4];
  _mm256_storeu_pd(lo, lov);
  _mm256_storeu_pd(hi, hiv);
  for (std::size_t i = k; i < n; ++i) {
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

double weighted_sum_avx2(const double* w, std::size_t n) {
  __m256d accv = _mm256_setzero_pd();
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) accv = _mm256_add_pd(accv, _mm256_loadu_pd(w + i));
  double acc[4];
  _mm256_storeu_pd(acc, accv);
  for (std::size_t i = k; i < n; ++i) acc[i % 4] += w[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double slab_weight_avx2(const double* coord, const double* w, std::size_t n, double lo,
                        double hi) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  __m256d accv = _mm256_setzero_pd();
  const std::size_t k = n & ~std::size_t{3};
  for (std::size_t i = 0; i < k; i += 4) {
    const __m256d c = _mm256_loadu_pd(coord + i);
    const __m256d in = _mm256_and_pd(_mm256_cmp_pd(c, lov, _CMP_GE_OQ),
                                     _mm256_cmp_pd(c, hiv, _CMP_LE_OQ));
    accv = _mm256_add_pd(accv, _mm256_and_pd(in, _mm256_loadu_pd(w + i)));
  }
  double acc[4];
  _mm256_storeu_pd(acc, accv);
  for (std::size_t i = k; i < n; ++i) {
    const double add = (coord[i] >= lo && coord[i] <= hi) ? w[i] : 0.0;
    acc[i % 4] += add;
  }
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

}  // namespace

const Backend* avx2_backend() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (!supported) return nullptr;
  static const Backend backend = {
      "avx2",       dot_axis_avx2, horizontal_angles_avx2, sphere_fold_avx2,
      rotate3_avx2, minmax_avx2,   weighted_sum_avx2,      slab_weight_avx2,
  };
  return &backend;
}

}  // namespace mwpose::kernels

#else  // non-x86-64 builds: scalar only

namespace mwpose::kernels {
const Backend* avx2_backend() { return nullptr; }
}  // namespace mwpose::kernels

#endif
