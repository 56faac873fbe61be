#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwpose/evaluate.hpp"
#include "mwpose/io.hpp"
#include "mwpose/kernels.hpp"
#include "mwpose/normals.hpp"
#include "mwpose/pipeline.hpp"
#include "mwpose/version.hpp"

namespace {

using namespace mwpose;

int exit_code_for(errc c) {
  switch (c) {
    case errc::parse_error:
    case errc::unsupported_format:
    case errc::io_error:
    case errc::bad_config:
    case errc::bad_resolution:
      return 1;
    default:
      return 2;
  }
}

Vec3 parse_axis(const std::string& text) {
  double x = 0, y = 0, z = 0;
  char trailing = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &x, &y, &z, &trailing) != 3)
    fail(errc::bad_config, "expected an axis as 'x,y,z', got '" + text + "'");
  return {x, y, z};
}

std::string basename_of(const std::string& path) {
  const std::size_t sep = path.find_last_of("/\\");
  return sep == std::string::npos ? path : path.substr(sep + 1);
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(errc::io_error, "write failed: " + path);
}

// Flags shared by the align and eval subcommands; mirrors AlignmentConfig.
struct AlignmentFlags {
  double resolution = defaults::kHistogramResolutionDeg;
  double v_resolution = defaults::kSphereResolutionDeg;
  double threshold = defaults::kPeakThresholdFraction;
  double refine_window = defaults::kRefineWindowDeg;
  double v_refine_window = defaults::kRefineWindowDeg;
  int threads = 0;
  std::string kernel = "auto";
  std::string frame_z = "0,0,1";
  std::string frame_x = "1,0,0";
  bool no_vertical = false;
  bool deterministic = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--resolution", resolution, "Horizontal histogram resolution in degrees")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--v-resolution", v_resolution, "Vertical sphere grid resolution in degrees")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", threshold, "Peak threshold as a fraction of the maximum cell")
        ->capture_default_str()
        ->check(CLI::Range(1e-9, 1.0));
    cmd->add_option("--refine-window", refine_window,
                    "Horizontal refinement window in degrees")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--v-refine-window", v_refine_window,
                    "Vertical refinement window in degrees")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--kernel", kernel, "Compute backend: auto, scalar or avx2")
        ->capture_default_str()
        ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    cmd->add_option("--frame-z", frame_z, "Vertical axis as 'x,y,z'")->capture_default_str();
    cmd->add_option("--frame-x", frame_x, "Horizontal reference axis as 'x,y,z'")
        ->capture_default_str();
    cmd->add_flag("--no-vertical", no_vertical, "Skip vertical leveling (pre-leveled data)");
    cmd->add_flag("--deterministic", deterministic,
                  "Single-threaded, zeroed timings, byte-stable outputs");
  }

  AlignmentConfig build() const {
    if (!kernels::select(kernel))
      fail(errc::bad_config, "kernel backend '" + kernel + "' is not available on this machine");
    AlignmentConfig cfg;
    cfg.frame = FrameConfig(UnitVec3::of(parse_axis(frame_z)), UnitVec3::of(parse_axis(frame_x)));
    cfg.horizontal_resolution = resolution;
    cfg.vertical_resolution = v_resolution;
    cfg.threshold_fraction = threshold;
    cfg.horizontal_refine_window = refine_window;
    cfg.vertical_refine_window = v_refine_window;
    cfg.enable_vertical = !no_vertical;
    cfg.deterministic = deterministic;
    cfg.threads = threads;
    return cfg;
  }
};

struct AlignArgs {
  std::string input;
  std::string output;
  std::string report;
  std::string histogram_csv;
  std::string sphere_csv;
  double frames_fraction = 0.0;
  bool list_frames = false;
  bool canonicalize = false;
  bool ascii = false;
  bool f64 = false;
  AlignmentFlags flags;
};

struct EvalArgs {
  std::string input;
  std::string csv;
  std::string report;
  int trials = defaults::kEvalTrials;
  std::uint64_t seed = 0;
  double tilt_bound = defaults::kEvalTiltBoundDeg;
  double gamma_bound = defaults::kEvalGammaBoundDeg;
  AlignmentFlags flags;
};

struct NormalsArgs {
  std::string input;
  std::string output;
  int k = defaults::kNormalEstimationK;
  double cell = defaults::kSubsampleCellMeters;
  bool no_subsample = false;
  int threads = 0;
  bool ascii = false;
  bool f64 = false;
};

int cmd_align(const AlignArgs& args) {
  const Geometry geom = load_geometry(args.input);
  const GeometrySet set = to_samples(geom);
  const AlignmentConfig cfg = [&] {
    AlignmentConfig c = args.flags.build();
    c.enable_canonicalization = args.canonicalize;
    return c;
  }();

  const PoseNormalization result = normalize_pose(set, cfg);
  // With --report - the JSON owns standard output; route prose to stderr.
  std::FILE* prose = args.report == "-" ? stderr : stdout;

  std::fprintf(prose, "input: %s (%zu samples)\n", args.input.c_str(), set.size());
  if (result.vertical) {
    const Vec3& z = result.vertical->z_star.vec();
    std::fprintf(prose, "vertical: tilt corrected %.4f deg (z* = %.6f, %.6f, %.6f)\n",
                 angle_between(result.vertical->z_star, cfg.frame.z()), z.x, z.y, z.z);
  }
  std::fprintf(prose, "horizontal: gamma = %.4f deg%s\n", result.horizontal.gamma_refined,
               result.horizontal.refine_fell_back ? " (refinement fell back to coarse)" : "");
  if (result.canonical)
    std::fprintf(prose, "canonicalization: %d quarter turn(s)%s%s\n",
                 result.canonical->quarter_turns,
                 result.canonical->extents_ambiguous ? ", near-square extents" : "",
                 result.canonical->slabs_ambiguous ? ", near-equal end slabs" : "");

  if (args.list_frames) {
    GeometrySet leveled =
        result.vertical ? apply_rotation(set, result.vertical->rotation) : set;
    HorizontalOptions hopts;
    hopts.resolution = cfg.horizontal_resolution;
    hopts.threshold_fraction = cfg.threshold_fraction;
    hopts.refine_window = cfg.horizontal_refine_window;
    hopts.threads = cfg.deterministic ? 1 : cfg.threads;
    const auto frames =
        list_manhattan_frames(leveled, cfg.frame, args.frames_fraction, hopts);
    std::fprintf(prose, "manhattan frames (fraction %.2f):\n", args.frames_fraction);
    std::fprintf(prose, "  gamma_deg    support\n");
    for (const ManhattanFrame& f : frames)
      std::fprintf(prose, "  %9.4f %10.4f\n", f.gamma, f.support);
  }

  if (!args.output.empty()) {
    SaveOptions opts;
    opts.binary = !args.ascii;
    opts.float64 = args.f64;
    const GeometrySet aligned = apply_rotation(set, result.rotation);
    Geometry out;
    if (aligned.mesh)
      out.mesh = std::make_shared<TriangleMesh>(*aligned.mesh);
    else
      out.cloud = std::make_shared<PointCloud>(*aligned.cloud);
    save_geometry(out, args.output, GeomFormat::auto_detect, opts);
    std::fprintf(prose, "wrote aligned geometry: %s\n", args.output.c_str());
  }
  if (!args.report.empty()) {
    write_text(args.report, report_to_json(result, cfg) + "\n");
    if (args.report != "-") std::fprintf(prose, "wrote report: %s\n", args.report.c_str());
  }
  if (!args.histogram_csv.empty()) {
    write_text(args.histogram_csv, histogram_to_csv(result.horizontal.histogram));
    std::fprintf(prose, "wrote histogram: %s\n", args.histogram_csv.c_str());
  }
  if (!args.sphere_csv.empty()) {
    if (!result.vertical)
      fail(errc::bad_config, "--sphere-csv requires the vertical stage (drop --no-vertical)");
    write_text(args.sphere_csv, sphere_grid_to_csv(result.vertical->grid));
    std::fprintf(prose, "wrote sphere grid: %s\n", args.sphere_csv.c_str());
  }
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const Geometry geom = load_geometry(args.input);
  const GeometrySet set = to_samples(geom);

  EvalOptions opts;
  opts.trials = args.trials;
  opts.seed = args.seed;
  opts.tilt_bound = args.tilt_bound;
  opts.gamma_bound = args.gamma_bound;
  opts.config = args.flags.build();

  EvalReport report = run_evaluation(set, opts);
  report.dataset = basename_of(args.input);

  // With --csv - or --report - the machine format owns standard output.
  std::FILE* prose = (args.csv == "-" || args.report == "-") ? stderr : stdout;
  std::fprintf(prose, "%-20s %8s %10s %14s %10s %14s %11s %15s\n", "Dataset", "N", "Mean δ_v",
               "Std.Dev. δ_v", "Mean δ_h", "Std.Dev. δ_h", "Mean Time", "Std.Dev. Time");
  std::fprintf(prose, "%-20s %8zu %9.4f %13.4f %9.4f %13.4f %10.4f %14.4f\n",
               report.dataset.c_str(), report.sample_count, report.vertical.mean,
               report.vertical.stddev, report.horizontal.mean, report.horizontal.stddev,
               report.runtime_s.mean, report.runtime_s.stddev);
  if (report.failures > 0)
    std::fprintf(stderr, "mwpose: %d of %zu trials failed\n", report.failures,
                 report.trials.size());

  if (!args.csv.empty()) write_text(args.csv, eval_to_csv(report));
  if (!args.report.empty()) write_text(args.report, eval_to_json(report, opts) + "\n");
  return report.failures > 0 ? 2 : 0;
}

int cmd_normals(const NormalsArgs& args) {
  const Geometry geom = load_geometry(args.input);
  if (geom.is_mesh())
    fail(errc::bad_config, "normal estimation expects a point cloud, got a mesh");
  PointCloud cloud = *geom.cloud;
  const std::size_t before = cloud.points.size();
  if (!args.no_subsample) cloud = grid_subsample(cloud, args.cell);
  cloud = estimate_normals(cloud, args.k, args.threads);
  std::printf("points: %zu in, %zu out (k = %d)\n", before, cloud.points.size(), args.k);

  Geometry out;
  out.cloud = std::make_shared<PointCloud>(std::move(cloud));
  SaveOptions opts;
  opts.binary = !args.ascii;
  opts.float64 = args.f64;
  save_geometry(out, args.output, GeomFormat::auto_detect, opts);
  std::printf("wrote: %s\n", args.output.c_str());
  return 0;
}

int cmd_info(const std::string& input) {
  const Geometry geom = load_geometry(input);
  if (geom.is_mesh()) {
    std::printf("kind: mesh\n");
    std::printf("vertices: %zu\n", geom.mesh->vertices.size());
    std::printf("faces: %zu\n", geom.mesh->faces.size());
  } else {
    std::printf("kind: point cloud\n");
    std::printf("points: %zu\n", geom.cloud->points.size());
    std::printf("has_normals: %s\n", geom.cloud->has_normals() ? "yes" : "no");
  }
  const std::vector<Vec3>& pts = geom.is_mesh() ? geom.mesh->vertices : geom.cloud->points;
  if (!pts.empty()) {
    Vec3 mn = pts.front(), mx = pts.front();
    for (const Vec3& p : pts) {
      mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
      mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
    }
    std::printf("bbox_min: %.6f %.6f %.6f\n", mn.x, mn.y, mn.z);
    std::printf("bbox_max: %.6f %.6f %.6f\n", mx.x, mx.y, mx.z);
  }
  const bool can_sample =
      geom.is_mesh() ? !geom.mesh->faces.empty()
                     : !geom.cloud->points.empty() && geom.cloud->has_normals();
  if (can_sample) {
    const GeometrySet set = to_samples(geom);
    std::printf("samples: %zu\n", set.size());
    std::printf("total_weight: %.6f\n", set.total_weight());
    if (set.provenance == Provenance::mesh)
      std::printf("degenerate_faces_dropped: %zu\n", set.degenerate_faces_dropped);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose normalization for indoor mapping point clouds and meshes"};
  app.name(kToolName);
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  AlignArgs align;
  CLI::App* align_cmd =
      app.add_subcommand("align", "Rotate a dataset into its normalized pose");
  align_cmd->add_option("input", align.input, "Input .ply or .obj file")->required();
  align_cmd->add_option("-o,--output", align.output, "Write the aligned geometry here");
  align_cmd->add_option("--report", align.report, "Write the JSON report here ('-' = stdout)");
  align_cmd
      ->add_option("--frames", align.frames_fraction,
                   "List all Manhattan frames above this support fraction")
      ->check(CLI::Range(1e-9, 1.0));
  align_cmd->add_flag("--canonicalize", align.canonicalize,
                      "Resolve the quarter-turn ambiguity (bbox + slab rule)");
  align_cmd->add_option("--histogram-csv", align.histogram_csv,
                        "Write the folded angle histogram as CSV");
  align_cmd->add_option("--sphere-csv", align.sphere_csv,
                        "Write the folded sphere grid as CSV");
  align_cmd->add_flag("--ascii", align.ascii, "Write PLY output as ASCII instead of binary");
  align_cmd->add_flag("--f64", align.f64, "Write coordinates as 64-bit floats");
  align.flags.add_to(align_cmd);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Random-rotation evaluation protocol against a ground-truth pose");
  eval_cmd->add_option("input", eval.input, "Input file in ground-truth pose")->required();
  eval_cmd->add_option("--trials", eval.trials, "Number of random poses")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000000));
  eval_cmd->add_option("--seed", eval.seed, "RNG seed")->capture_default_str();
  eval_cmd->add_option("--tilt-bound", eval.tilt_bound,
                       "Bound for the alpha/beta tilt draw in degrees")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 45.0));
  eval_cmd->add_option("--gamma-bound", eval.gamma_bound,
                       "Bound for the gamma draw in degrees")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 180.0));
  eval_cmd->add_option("--csv", eval.csv, "Write per-trial results as CSV ('-' = stdout)");
  eval_cmd->add_option("--report", eval.report, "Write the JSON report here ('-' = stdout)");
  eval.flags.add_to(eval_cmd);

  NormalsArgs normals;
  CLI::App* normals_cmd = app.add_subcommand(
      "normals", "Subsample a point cloud and estimate plane-fit normals");
  normals_cmd->add_option("input", normals.input, "Input point cloud")->required();
  normals_cmd->add_option("-o,--output", normals.output, "Output file")->required();
  normals_cmd->add_option("--k", normals.k, "Neighbors per plane fit")
      ->capture_default_str()
      ->check(CLI::Range(3, 1000));
  normals_cmd->add_option("--cell", normals.cell, "Subsampling voxel size in meters")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  normals_cmd->add_flag("--no-subsample", normals.no_subsample, "Skip voxel subsampling");
  normals_cmd->add_option("--threads", normals.threads, "Worker threads (0 = all cores)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  normals_cmd->add_flag("--ascii", normals.ascii, "Write PLY output as ASCII");
  normals_cmd->add_flag("--f64", normals.f64, "Write coordinates as 64-bit floats");

  std::string info_input;
  CLI::App* info_cmd = app.add_subcommand("info", "Print dataset statistics");
  info_cmd->add_option("input", info_input, "Input file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (align_cmd->parsed()) {
      align.list_frames = align_cmd->count("--frames") > 0;
      return cmd_align(align);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (normals_cmd->parsed()) return cmd_normals(normals);
    if (info_cmd->parsed()) return cmd_info(info_input);
  } catch (const Error& e) {
    std::fprintf(stderr, "mwpose: error: %s\n", e.what());
    return exit_code_for(e.code());
  }
  return 0;
}
