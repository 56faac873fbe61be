#include <algorithm>
#include <cmath>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mwpose/pipeline.hpp"
#include "mwpose/rotation.hpp"
#include "support/subprocess.hpp"
#include "support/synthetic.hpp"

using namespace mwpose;

namespace {

double rotation_angle_deg(const RotationMatrix3& r) {
  const double trace = r.m[0] + r.m[4] + r.m[8];
  return rad_to_deg(std::acos(std::clamp((trace - 1.0) / 2.0, -1.0, 1.0)));
}

GeometrySet posed_box(double alpha, double beta, double gamma) {
  const FrameConfig frame;
  const RotationMatrix3 pose = rotation_about_axis(frame.x(), alpha) *
                               rotation_about_axis(frame.y(), beta) *
                               rotation_about_axis(frame.z(), gamma);
  testsup::BoxSpec spec;
  spec.end_wall_bonus = 2.0;
  return apply_rotation(testsup::box_set(spec), pose);
}

}  // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("aligned box is a fixed point of the full pipeline") {
  testsup::BoxSpec spec;
  spec.end_wall_bonus = 2.0;
  AlignmentConfig config;
  config.enable_canonicalization = true;
  const PoseNormalization result = normalize_pose(testsup::box_set(spec), config);
  CHECK(rotation_angle_deg(result.rotation) < 0.1);
  REQUIRE(result.canonical.has_value());
  CHECK(result.canonical->quarter_turns == 0);
}

TEST_CASE("posed box recovers the ground-truth rotation up to a quarter turn") {
  const GeometrySet posed = posed_box(-25.0, 15.0, 30.0);
  AlignmentConfig config;
  config.enable_canonicalization = true;
  const PoseNormalization result = normalize_pose(posed, config);

  const RotationMatrix3 pose = rotation_about_axis(FrameConfig{}.x(), -25.0) *
                               rotation_about_axis(FrameConfig{}.y(), 15.0) *
                               rotation_about_axis(FrameConfig{}.z(), 30.0);
  const RotationMatrix3 total = result.rotation * pose;
  const Vec3 z = total.apply({0, 0, 1});
  CHECK(rad_to_deg(std::acos(std::clamp(z.z, -1.0, 1.0))) < 0.5);

  const Vec3 x = total.apply({1, 0, 0});
  double planar = rad_to_deg(std::atan2(std::fabs(x.y), std::fabs(x.x)));
  planar = std::min(planar, 90.0 - planar);
  CHECK(planar < 0.5);
}

TEST_CASE("composed rotation multiplies the stages in order") {
  AlignmentConfig config;
  config.enable_canonicalization = true;
  const PoseNormalization result = normalize_pose(posed_box(5.0, -3.0, 20.0), config);
  REQUIRE(result.vertical.has_value());
  REQUIRE(result.canonical.has_value());
  const RotationMatrix3 expected =
      result.canonical->rotation * (result.horizontal.rotation * result.vertical->rotation);
  for (int i = 0; i < 9; ++i) CHECK(result.rotation.m[i] == expected.m[i]);
}

TEST_CASE("vertical stage can be disabled") {
  AlignmentConfig config;
  config.enable_vertical = false;
  const PoseNormalization result = normalize_pose(posed_box(0.0, 0.0, 25.0), config);
  CHECK_FALSE(result.vertical.has_value());
  CHECK(result.vertical_normal_count == 0);
  CHECK(result.timings.vertical_s == 0.0);
  for (int i = 0; i < 9; ++i) CHECK(result.rotation.m[i] == result.horizontal.rotation.m[i]);
}

TEST_CASE("empty sample set is rejected up front") {
  try {
    normalize_pose(GeometrySet{});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_geometry);
  }
}

TEST_CASE("invalid configuration values are rejected") {
  const GeometrySet set = testsup::box_set();
  AlignmentConfig config;
  SUBCASE("zero threshold") { config.threshold_fraction = 0.0; }
  SUBCASE("threshold above one") { config.threshold_fraction = 1.5; }
  SUBCASE("zero horizontal window") { config.horizontal_refine_window = 0.0; }
  SUBCASE("negative vertical window") { config.vertical_refine_window = -1.0; }
  try {
    normalize_pose(set, config);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_config);
  }
}

TEST_CASE("stage failure surfaces the completed stages") {
  // A floor-only scene levels fine but leaves nothing in the horizontal band.
  GeometrySet floor;
  testsup::append_plane(floor, {0, 0, 0}, {8, 0, 0}, {0, 5, 0}, {0, 0, 1}, 16, 40.0);
  try {
    normalize_pose(floor);
    FAIL("expected an exception");
  } catch (const PipelineError& e) {
    CHECK(e.code() == errc::no_horizontal_normals);
    CHECK(e.partial().vertical.has_value());
    CHECK(e.partial().sample_count == floor.size());
  }
}

TEST_CASE("json report round-trips the rotation and carries every section") {
  AlignmentConfig config;
  config.enable_canonicalization = true;
  config.deterministic = true;
  const PoseNormalization result = normalize_pose(posed_box(-10.0, 5.0, 40.0), config);
  const std::string text = report_to_json(result, config);

  const nlohmann::json j = nlohmann::json::parse(text);
  for (const char* key : {"tool", "version", "schema_version", "config", "input",
                          "rotation_row_major", "vertical", "horizontal", "canonicalization",
                          "timings_s"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["input"]["sample_count"].get<std::size_t>() == result.sample_count);
  CHECK_FALSE(j["vertical"].is_null());
  CHECK_FALSE(j["canonicalization"].is_null());

  const auto m = j["rotation_row_major"];
  REQUIRE(m.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(m[static_cast<std::size_t>(i)].get<double>() == result.rotation.m[i]);

  SUBCASE("deterministic reports are byte-identical across runs") {
    const PoseNormalization again = normalize_pose(posed_box(-10.0, 5.0, 40.0), config);
    CHECK(report_to_json(again, config) == text);
    CHECK(again.timings.total_s == 0.0);
  }
}

TEST_CASE("report writing hits disk verbatim") {
  AlignmentConfig config;
  config.deterministic = true;
  const PoseNormalization result = normalize_pose(posed_box(0.0, 0.0, 10.0), config);
  const auto path = testsup::scratch_dir() / "report.json";
  write_report(result, config, path.string());
  CHECK(testsup::slurp(path.string()) == report_to_json(result, config) + "\n");

  SUBCASE("unwritable path is an io error") {
    try {
      write_report(result, config, "/nonexistent-dir/report.json");
      FAIL("expected an exception");
    } catch (const Error& e) {
      CHECK(e.code() == errc::io_error);
    }
  }
}

TEST_CASE("diagnostic csv dumps") {
  AlignmentConfig config;
  const PoseNormalization result = normalize_pose(posed_box(8.0, -4.0, 30.0), config);

  SUBCASE("histogram carries one row per cell") {
    const std::string csv = histogram_to_csv(result.horizontal.histogram);
    CHECK(csv.rfind("cell_start_deg,weight\n", 0) == 0);
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(rows == 1u + static_cast<std::size_t>(result.horizontal.histogram.cells()));
  }
  SUBCASE("sphere grid carries one row per cell") {
    REQUIRE(result.vertical.has_value());
    const SphereGrid& grid = result.vertical->grid;
    const std::string csv = sphere_grid_to_csv(grid);
    CHECK(csv.rfind("phi_cell_deg,theta_cell_deg,weight\n", 0) == 0);
    const auto rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
    CHECK(rows == 1u + static_cast<std::size_t>(grid.rows) * static_cast<std::size_t>(grid.cols));
  }
}

TEST_SUITE_END();
