#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/io.hpp"
#include "mwpose/rotation.hpp"
#include "support/subprocess.hpp"
#include "support/synthetic.hpp"

using namespace mwpose;
using testsup::run_cmd;

namespace {

const std::string kObjCube =
    "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
    "v 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
    "f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\n"
    "f 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8\n";

std::string bin() {
  const std::string path = testsup::mwpose_bin();
  REQUIRE_FALSE(path.empty());
  return path;
}

std::string write_turned_box_ply(const std::string& name, double gamma_deg) {
  GeometrySet set = testsup::box_set();
  set = apply_rotation(set, rotation_about_axis(FrameConfig{}.z(), gamma_deg));
  Geometry geom;
  geom.cloud = testsup::as_cloud(set);
  const auto path = (testsup::scratch_dir() / name).string();
  save_geometry(geom, path);
  return path;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("align writes an axis-aligned copy and reports the turn") {
  const std::string in = write_turned_box_ply("turned30.ply", 30.0);
  const std::string out = (testsup::scratch_dir() / "aligned.ply").string();
  const auto res =
      run_cmd(bin() + " align " + in + " -o " + out + " --deterministic 2>/dev/null");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("gamma = 30.0000") != std::string::npos);
  CHECK(res.out.find("wrote aligned geometry:") != std::string::npos);

  const GeometrySet aligned = to_samples(load_geometry(out));
  REQUIRE(aligned.size() > 0);
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    const double m = std::max({std::fabs(aligned.samples.nx[i]), std::fabs(aligned.samples.ny[i]),
                               std::fabs(aligned.samples.nz[i])});
    REQUIRE(rad_to_deg(std::acos(std::min(1.0, m))) <= 0.5);
  }
}

TEST_CASE("align dumps the gamma histogram as csv") {
  const std::string in = write_turned_box_ply("turned10.ply", 10.0);
  const std::string csv = (testsup::scratch_dir() / "hist.csv").string();
  const auto res = run_cmd(bin() + " align " + in + " --histogram-csv " + csv + " >/dev/null");
  REQUIRE(res.exit_code == 0);
  const std::string text = testsup::slurp(csv);
  CHECK(text.rfind("cell_start_deg,weight\n", 0) == 0);
  CHECK(count_lines(text) == 91);
}

TEST_CASE("align lists competing frames on request") {
  const std::string in = write_turned_box_ply("turned20.ply", 20.0);
  const auto res = run_cmd(bin() + " align " + in + " --frames 0.5 2>/dev/null");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("manhattan frames (fraction 0.50):") != std::string::npos);
  CHECK(res.out.find("gamma_deg    support") != std::string::npos);
  CHECK(res.out.find("20.00") != std::string::npos);
}

TEST_CASE("report on stdout is pure json") {
  const std::string in = write_turned_box_ply("turned5.ply", 5.0);
  const auto res = run_cmd(bin() + " align " + in + " --report - 2>/dev/null");
  REQUIRE(res.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(res.out);
  CHECK(j["rotation_row_major"].size() == 9);
  CHECK(j["tool"] == "mwpose");
}

TEST_CASE("missing input file exits with the usage error code") {
  const auto res = run_cmd(bin() + " align /nonexistent/input.ply 2>&1");
  CHECK(res.exit_code == 1);
  CHECK(res.out.find("mwpose: error:") != std::string::npos);
}

TEST_CASE("unparseable file exits with the usage error code") {
  const auto path = (testsup::scratch_dir() / "garbage.ply").string();
  std::ofstream(path) << "hello\n";
  const auto res = run_cmd(bin() + " info " + path + " 2>&1");
  CHECK(res.exit_code == 1);
  CHECK(res.out.find("mwpose: error:") != std::string::npos);
}

TEST_CASE("scene without horizontal structure exits with the data error code") {
  GeometrySet floor;
  testsup::append_plane(floor, {0, 0, 0}, {8, 0, 0}, {0, 5, 0}, {0, 0, 1}, 16, 40.0);
  Geometry geom;
  geom.cloud = testsup::as_cloud(floor);
  const auto path = (testsup::scratch_dir() / "floor.ply").string();
  save_geometry(geom, path);
  const auto res = run_cmd(bin() + " align " + path + " 2>&1 >/dev/null");
  CHECK(res.exit_code == 2);
  CHECK(res.out.find("mwpose: error:") != std::string::npos);
}

TEST_CASE("eval runs are reproducible byte for byte") {
  const std::string in = write_turned_box_ply("evalbox.ply", 0.0);
  const std::string c1 = (testsup::scratch_dir() / "eval1.csv").string();
  const std::string c2 = (testsup::scratch_dir() / "eval2.csv").string();
  const std::string flags = " --trials 20 --seed 7 --deterministic --csv ";
  const auto r1 = run_cmd(bin() + " eval " + in + flags + c1 + " 2>/dev/null");
  const auto r2 = run_cmd(bin() + " eval " + in + flags + c2 + " 2>/dev/null");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const std::string text = testsup::slurp(c1);
  CHECK(text == testsup::slurp(c2));
  CHECK(text.rfind("alpha_deg,beta_deg,gamma_deg,delta_v_deg,delta_h_deg,runtime_s\n", 0) == 0);
  CHECK(r1.out.find("Dataset") != std::string::npos);
  CHECK(r1.out.find("Mean δ_v") != std::string::npos);
}

TEST_CASE("zero trials is rejected at the command line") {
  const std::string in = write_turned_box_ply("evalbox0.ply", 0.0);
  const auto res = run_cmd(bin() + " eval " + in + " --trials 0 2>/dev/null");
  CHECK(res.exit_code == 1);
}

TEST_CASE("normals subcommand attaches estimated normals") {
  PointCloud plane;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) plane.points.push_back({0.1 * i, 0.1 * j, 0.0});
  }
  Geometry geom;
  geom.cloud = std::make_shared<PointCloud>(std::move(plane));
  const auto in = (testsup::scratch_dir() / "bare_plane.ply").string();
  const auto out = (testsup::scratch_dir() / "oriented_plane.ply").string();
  save_geometry(geom, in);

  const auto res = run_cmd(bin() + " normals " + in + " -o " + out + " --k 10");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("wrote: " + out) != std::string::npos);

  const Geometry result = load_geometry(out);
  REQUIRE_FALSE(result.is_mesh());
  REQUIRE(result.cloud->has_normals());
  for (const Vec3& n : *result.cloud->normals) {
    REQUIRE(std::fabs(n.z) > std::cos(deg_to_rad(5.0)));
  }
}

TEST_CASE("info summarizes a mesh with its sampling weights") {
  const auto path = (testsup::scratch_dir() / "cube.obj").string();
  std::ofstream(path) << kObjCube;
  const auto res = run_cmd(bin() + " info " + path);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("kind: mesh") != std::string::npos);
  CHECK(res.out.find("vertices: 8") != std::string::npos);
  CHECK(res.out.find("faces: 12") != std::string::npos);
  CHECK(res.out.find("samples: 12") != std::string::npos);
  CHECK(res.out.find("total_weight: 6.000000") != std::string::npos);
}

TEST_CASE("help text matches the frozen goldens") {
  const char* golden_env = std::getenv("MWPOSE_GOLDEN_DIR");
  REQUIRE(golden_env != nullptr);
  const std::filesystem::path golden_dir = golden_env;
  const struct {
    const char* args;
    const char* file;
  } pages[] = {
      {"--help", "help_root.txt"},        {"align --help", "help_align.txt"},
      {"eval --help", "help_eval.txt"},   {"normals --help", "help_normals.txt"},
      {"info --help", "help_info.txt"},
  };
  for (const auto& page : pages) {
    CAPTURE(page.file);
    const auto res = run_cmd(bin() + " " + page.args);
    REQUIRE(res.exit_code == 0);
    CHECK(res.out == testsup::slurp(golden_dir / page.file));
  }
}

TEST_SUITE_END();
