#include <cmath>
#include <vector>

#include "doctest.h"
#include "kernels/atan_poly.hpp"
#include "mwpose/evaluate.hpp"
#include "mwpose/kernels.hpp"

using namespace mwpose;

namespace {

struct Columns {
  std::vector<double> x, y, z, w;
};

// Random unit normals plus weights, including lane-tail sizes.
Columns random_columns(std::size_t n, std::uint64_t seed) {
  Columns c;
  TrialRng rng(seed, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double zc = 2.0 * rng.next_unit() - 1.0;
    const double az = 2.0 * kPi * rng.next_unit();
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    c.x.push_back(r * std::cos(az));
    c.y.push_back(r * std::sin(az));
    c.z.push_back(zc);
    c.w.push_back(rng.next_unit() * 3.0 + 0.01);
  }
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar backend always present and selectable") {
  const auto backends = kernels::available();
  REQUIRE_FALSE(backends.empty());
  CHECK(std::string(backends.front()->name) == "scalar");
  REQUIRE(kernels::select("scalar"));
  CHECK(std::string(kernels::active().name) == "scalar");
  REQUIRE(kernels::select("auto"));
  CHECK_FALSE(kernels::select("no-such-backend"));
}

TEST_CASE("first-quadrant atan2 matches the libm reference") {
  double worst = 0.0;
  for (int yi = 0; yi <= 400; ++yi) {
    for (int xi = 1; xi <= 400; ++xi) {
      const double y = yi / 400.0, x = xi / 400.0;
      const double ref = rad_to_deg(std::atan2(y, x));
      worst = std::max(worst, std::fabs(kernels::detail::atan2k_deg(y, x) - ref));
    }
  }
  CHECK(worst < 1e-12);
  SUBCASE("edge inputs") {
    CHECK(kernels::detail::atan2k_deg(0.0, 0.0) == 0.0);
    CHECK(kernels::detail::atan2k_deg(0.0, 1.0) == 0.0);
    CHECK(kernels::detail::atan2k_deg(1.0, 1.0) == doctest::Approx(45.0).epsilon(1e-14));
    CHECK(kernels::detail::atan2k_deg(1.0, 0.0) == doctest::Approx(90.0).epsilon(1e-14));
  }
}

TEST_CASE("vector backend matches the scalar reference bit for bit") {
  const kernels::Backend* vec = kernels::avx2_backend();
  if (vec == nullptr) {
    MESSAGE("avx2 backend not available on this machine; nothing to compare");
    return;
  }
  const kernels::Backend& ref = kernels::scalar_backend();
  const Vec3 ax = {1, 0, 0}, ay = {0, 1, 0}, az = {0, 0, 1};

  for (const std::size_t n : {std::size_t{1}, std::size_t{7}, std::size_t{4096},
                              std::size_t{10001}}) {
    CAPTURE(n);
    const Columns c = random_columns(n, 1000 + n);
    std::vector<double> a0(n), a1(n), b0(n), b1(n), c0(n), c1(n);

    ref.dot_axis(c.x.data(), c.y.data(), c.z.data(), n, {0.3, -0.4, 0.86}, a0.data());
    vec->dot_axis(c.x.data(), c.y.data(), c.z.data(), n, {0.3, -0.4, 0.86}, a1.data());
    CHECK(a0 == a1);

    ref.horizontal_angles(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, a0.data(), b0.data());
    vec->horizontal_angles(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, a1.data(), b1.data());
    CHECK(a0 == a1);
    CHECK(b0 == b1);

    ref.sphere_fold(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, az, a0.data(), b0.data(),
                    c0.data());
    vec->sphere_fold(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, az, a1.data(), b1.data(),
                     c1.data());
    CHECK(a0 == a1);
    CHECK(b0 == b1);
    CHECK(c0 == c1);

    const double r[9] = {0.36, -0.48, 0.8, 0.8, 0.6, 0.0, -0.48, 0.64, 0.6};
    ref.rotate3(c.x.data(), c.y.data(), c.z.data(), n, r, a0.data(), b0.data(), c0.data());
    vec->rotate3(c.x.data(), c.y.data(), c.z.data(), n, r, a1.data(), b1.data(), c1.data());
    CHECK(a0 == a1);
    CHECK(b0 == b1);
    CHECK(c0 == c1);

    double mn0, mx0, mn1, mx1;
    ref.minmax(c.w.data(), n, &mn0, &mx0);
    vec->minmax(c.w.data(), n, &mn1, &mx1);
    CHECK(mn0 == mn1);
    CHECK(mx0 == mx1);

    CHECK(ref.weighted_sum(c.w.data(), n) == vec->weighted_sum(c.w.data(), n));
    CHECK(ref.slab_weight(c.x.data(), c.w.data(), n, -0.5, 0.25) ==
          vec->slab_weight(c.x.data(), c.w.data(), n, -0.5, 0.25));
  }
}

TEST_CASE("sphere fold is antipode-exact at the kernel level") {
  const std::size_t n = 4096;
  Columns c = random_columns(n, 77);
  Columns neg = c;
  for (std::size_t i = 0; i < n; ++i) {
    neg.x[i] = -neg.x[i];
    neg.y[i] = -neg.y[i];
    neg.z[i] = -neg.z[i];
  }
  const kernels::Backend& ref = kernels::scalar_backend();
  const Vec3 ax = {1, 0, 0}, ay = {0, 1, 0}, az = {0, 0, 1};
  std::vector<double> p0(n), t0(n), d0(n), p1(n), t1(n), d1(n);
  ref.sphere_fold(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, az, p0.data(), t0.data(),
                  d0.data());
  ref.sphere_fold(neg.x.data(), neg.y.data(), neg.z.data(), n, ax, ay, az, p1.data(),
                  t1.data(), d1.data());
  CHECK(p0 == p1);
  CHECK(t0 == t1);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(d0[i] == -d1[i]);
}

TEST_CASE("folded outputs stay inside their grids") {
  const std::size_t n = 20000;
  const Columns c = random_columns(n, 3);
  const Vec3 ax = {1, 0, 0}, ay = {0, 1, 0}, az = {0, 0, 1};
  std::vector<double> raw(n), folded(n), phi(n), theta(n), zd(n);
  const kernels::Backend& k = kernels::active();
  k.horizontal_angles(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, raw.data(), folded.data());
  k.sphere_fold(c.x.data(), c.y.data(), c.z.data(), n, ax, ay, az, phi.data(), theta.data(),
                zd.data());
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(raw[i] >= -180.0);
    REQUIRE(raw[i] < 180.0);
    REQUIRE(folded[i] >= 0.0);
    REQUIRE(folded[i] < 90.0);
    REQUIRE(phi[i] >= 0.0);
    REQUIRE(phi[i] < 90.0);
    REQUIRE(theta[i] >= 0.0);
    REQUIRE(theta[i] <= 90.0);
  }
}

TEST_SUITE_END();
