#include <cmath>
#include <memory>

#include "doctest.h"
#include "mwpose/errors.hpp"
#include "mwpose/evaluate.hpp"
#include "mwpose/normals.hpp"

using namespace mwpose;

namespace {

std::shared_ptr<PointCloud> plane_grid(int side, double spacing, double z0 = 0.0) {
  auto cloud = std::make_shared<PointCloud>();
  for (int i = 0; i < side; ++i)
    for (int j = 0; j < side; ++j)
      cloud->points.push_back({i * spacing, j * spacing, z0});
  return cloud;
}

}  // namespace

TEST_SUITE_BEGIN("normals");

TEST_CASE("coplanar cloud gets plane normals") {
  const PointCloud out = estimate_normals(*plane_grid(10, 0.1), 10);
  REQUIRE(out.has_normals());
  for (const Vec3& n : *out.normals) {
    CHECK(std::fabs(std::fabs(n.z) - 1.0) < 1e-6);
    CHECK(std::fabs(n.x) < 1e-6);
  }
}

TEST_CASE("two perpendicular planes keep their own normals") {
  // Clearly separated grids so no neighborhood straddles the junction.
  PointCloud cloud;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      cloud.points.push_back({1.0 + i * 0.05, j * 0.05, 0.0});       // z = 0 plane
      cloud.points.push_back({-1.0, j * 0.05, 1.0 + i * 0.05});     // x = -1 plane
    }
  const PointCloud out = estimate_normals(cloud, 10);
  REQUIRE(out.has_normals());
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const Vec3& n = (*out.normals)[i];
    const bool on_floor = out.points[i].z == 0.0;
    const double along = on_floor ? std::fabs(n.z) : std::fabs(n.x);
    CHECK(rad_to_deg(std::acos(std::min(1.0, along))) < 2.0);
  }
}

TEST_CASE("too few points or too small k fail") {
  const auto cloud = plane_grid(10, 0.1);
  CHECK_THROWS_AS(estimate_normals(*cloud, 2), Error);
  PointCloud tiny;
  tiny.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  try {
    estimate_normals(tiny, 10);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == errc::too_few_points);
  }
}

TEST_CASE("normal estimation is deterministic") {
  auto cloud = plane_grid(12, 0.07);
  TrialRng rng(9, 0);
  for (Vec3& p : cloud->points) p.z += 0.001 * (rng.next_unit() - 0.5);
  const PointCloud a = estimate_normals(*cloud, 12);
  const PointCloud b = estimate_normals(*cloud, 12);
  REQUIRE(a.normals->size() == b.normals->size());
  for (std::size_t i = 0; i < a.normals->size(); ++i) {
    CHECK((*a.normals)[i].x == (*b.normals)[i].x);
    CHECK((*a.normals)[i].z == (*b.normals)[i].z);
  }
}

TEST_CASE("grid subsampling") {
  PointCloud cloud;
  SUBCASE("two points a millimeter apart collapse to one") {
    cloud.points = {{0, 0, 0}, {0.001, 0, 0}};
    CHECK(grid_subsample(cloud, 0.02).points.size() == 1);
  }
  SUBCASE("two points five centimeters apart stay distinct") {
    cloud.points = {{0, 0, 0}, {0.05, 0, 0}};
    CHECK(grid_subsample(cloud, 0.02).points.size() == 2);
  }
  SUBCASE("empty cloud passes through") {
    CHECK(grid_subsample(cloud, 0.02).points.empty());
  }
  SUBCASE("first point of a cell wins and keeps its normal") {
    cloud.points = {{0, 0, 0}, {0.001, 0, 0}};
    cloud.normals = std::vector<Vec3>{{1, 0, 0}, {0, 1, 0}};
    const PointCloud out = grid_subsample(cloud, 0.02);
    REQUIRE(out.points.size() == 1);
    CHECK((*out.normals)[0].x == 1.0);
  }
  SUBCASE("non-positive cell size is rejected") {
    CHECK_THROWS_AS(grid_subsample(cloud, 0.0), Error);
  }
}

TEST_SUITE_END();
