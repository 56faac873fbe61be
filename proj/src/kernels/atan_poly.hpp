#pragma once

#include <cmath>

// Per-element reference for the batch kernels. Every function here is written
// so that one call performs exactly the IEEE operation sequence of one SIMD
// lane of the vectorized backend: branches only select between values that
// both sides compute, fused multiply-adds are spelled std::fma, and min/max
// mirror the (a OP b) ? a : b semantics of the vector instructions. The
// backends are tested for bitwise-equal outputs, so any edit here must be
// mirrored in the vector code and vice versa.
namespace mwpose::kernels::detail {

inline constexpr int kAtanCoeffCount = 11;

// atan(s) in degrees ~= s * P(s^2) on |s| <= tan(22.5 deg), max error about
// 1.6e-14 degrees. Lowest order first. The coefficients are frozen: they are
// part of the bit-level output contract between backends.
inline constexpr double kAtanCoeff[kAtanCoeffCount] = {
    57.295779513082316,   // 180/pi
    -19.098593171024717,  //
    11.459155901975942,   //
    -8.185111300148527,   //
    6.36619494189966,     //
    -5.208630235474539,   //
    4.406031194276144,    //
    -3.8046751373401273,  //
    3.2596849535783394,   //
    -2.4926215225344457,  //
    1.212563042592688,    //
};

// Argument reduction threshold: tan(22.5 deg). atan(r) = 45 + atan((r-1)/(r+1))
// maps r in (threshold, 1] back into the polynomial's domain.
inline constexpr double kReduceThreshold = 0.41421356237309503;

// Largest double below 90; folded azimuths clamp here so the value 90 (the
// fold image of directions in the xz plane) stays inside the top grid cell.
inline constexpr double kJustBelow90 = 0x1.67fffffffffffp+6;
static_assert(kJustBelow90 < 90.0);

// Pole cutoff for the azimuth convention: |<n,z>| >= this means phi := 0.
inline constexpr double kPoleDot = 1.0 - 1e-9;

// P(s^2) evaluated with fused Horner steps, times s.
inline double atan_poly_deg(double s) {
  const double t = s * s;
  double acc = kAtanCoeff[kAtanCoeffCount - 1];
  for (int k = kAtanCoeffCount - 2; k >= 0; --k) acc = std::fma(acc, t, kAtanCoeff[k]);
  return s * acc;
}

// Angle of the point (x, y) with x >= 0, y >= 0, in degrees [0,90].
// atan2k_deg(0, 0) = 0.
inline double atan2k_deg(double y, double x) {
  const double p = (x > y) ? x : y;  // max, vector semantics
  const double q = (x < y) ? x : y;  // min
  const double r = q / p;            // NaN when p == 0; masked by the final select
  const double s_big = (r - 1.0) / (r + 1.0);
  const bool big = r > kReduceThreshold;
  const double s = big ? s_big : r;
  double a = atan_poly_deg(s);
  a = big ? (45.0 + a) : a;
  a = (y > x) ? (90.0 - a) : a;
  return (p == 0.0) ? 0.0 : a;
}

inline double dot3(double x, double y, double z, double vx, double vy, double vz) {
  return std::fma(z, vz, std::fma(y, vy, x * vx));
}

// Signed horizontal angle (clockwise-positive around the frame z, degrees in
// [-180,180)) and its fold into [0,90), from the normal's components along
// the frame x and y axes.
inline void horizontal_one(double a_along_x, double b_along_y, double* raw_out,
                           double* folded_out) {
  const double xp = a_along_x;
  const double yp = -b_along_y;
  const double m = atan2k_deg(std::fabs(yp), std::fabs(xp));
  double raw = (xp >= 0.0) ? std::copysign(m, yp) : std::copysign(180.0 - m, yp);
  raw = (raw == 180.0) ? -180.0 : raw;
  double f = (raw < 0.0) ? raw + 180.0 : raw;
  f = (f > 90.0) ? f - 90.0 : f;
  f = (f == 90.0) ? 0.0 : f;
  *raw_out = raw;
  *folded_out = f;
}

// Folded azimuth [0,90) and folded inclination [0,90] from the normal's
// components along the frame axes. Only absolute components enter, so n and
// -n produce identical bits.
inline void sphere_one(double a_along_x, double b_along_y, double c_along_z, double* phi_out,
                       double* theta_out) {
  const double ua = std::fabs(a_along_x);
  const double ub = std::fabs(b_along_y);
  const double uc = std::fabs(c_along_z);
  double phi = atan2k_deg(ua, ub);
  phi = (uc >= kPoleDot) ? 90.0 : phi;
  phi = (phi < kJustBelow90) ? phi : kJustBelow90;
  double s2 = (1.0 - uc) * (1.0 + uc);
  s2 = (s2 > 0.0) ? s2 : 0.0;
  *phi_out = phi;
  *theta_out = atan2k_deg(std::sqrt(s2), uc);
}

}  // namespace mwpose::kernels::detail
