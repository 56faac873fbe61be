#include "mwpose/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <string>

#include "json.hpp"
#include "mwpose/version.hpp"

namespace mwpose {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

nlohmann::ordered_json vec_json(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x, v.y, v.z});
}

nlohmann::ordered_json matrix_json(const RotationMatrix3& R) {
  nlohmann::ordered_json m = nlohmann::ordered_json::array();
  for (double e : R.m) m.push_back(e);
  return m;
}

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void validate(const AlignmentConfig& config) {
  if (!(config.horizontal_refine_window > 0.0) || !(config.vertical_refine_window > 0.0))
    fail(errc::bad_config, "refinement windows must be positive");
  if (!(config.threshold_fraction > 0.0) || config.threshold_fraction > 1.0)
    fail(errc::bad_config, "peak threshold fraction must lie in (0, 1]");
}

}  // namespace

PoseNormalization normalize_pose(const GeometrySet& set, const AlignmentConfig& config) {
  validate(config);
  if (set.size() == 0) fail(errc::empty_geometry, "cannot align an empty sample set");
  const int threads = config.deterministic ? 1 : config.threads;

  PoseNormalization result;
  result.sample_count = set.size();
  result.rotation = RotationMatrix3::identity();

  const auto stage_failed = [&](const Error& e) {
    return PipelineError(e.code(), e.what(), result);
  };

  const auto t_start = Clock::now();
  GeometrySet leveled;
  const GeometrySet* current = &set;

  if (config.enable_vertical) {
    const auto t0 = Clock::now();
    VerticalOptions vopts;
    vopts.resolution = config.vertical_resolution;
    vopts.threshold_fraction = config.threshold_fraction;
    vopts.refine_window = config.vertical_refine_window;
    vopts.threads = threads;
    try {
      result.vertical = align_vertical(set, config.frame, vopts);
    } catch (const Error& e) {
      throw stage_failed(e);
    }
    result.vertical_normal_count = result.vertical->normal_count;
    leveled = apply_rotation(set, result.vertical->rotation);
    current = &leveled;
    result.timings.vertical_s = seconds_since(t0);
  }

  GeometrySet turned;
  {
    const auto t0 = Clock::now();
    HorizontalOptions hopts;
    hopts.resolution = config.horizontal_resolution;
    hopts.threshold_fraction = config.threshold_fraction;
    hopts.refine_window = config.horizontal_refine_window;
    hopts.threads = threads;
    try {
      result.horizontal = align_horizontal(*current, config.frame, hopts);
    } catch (const Error& e) {
      throw stage_failed(e);
    }
    result.horizontal_normal_count = result.horizontal.normal_count;
    if (config.enable_canonicalization) {
      turned = apply_rotation(*current, result.horizontal.rotation);
      current = &turned;
    }
    result.timings.horizontal_s = seconds_since(t0);
  }

  if (config.enable_canonicalization) {
    const auto t0 = Clock::now();
    try {
      result.canonical = canonicalize_quadrant(*current, config.frame, threads);
    } catch (const Error& e) {
      throw stage_failed(e);
    }
    result.timings.canonicalize_s = seconds_since(t0);
  }

  result.rotation = result.horizontal.rotation;
  if (result.vertical) result.rotation = result.rotation * result.vertical->rotation;
  if (result.canonical) result.rotation = result.canonical->rotation * result.rotation;
  result.timings.total_s = seconds_since(t_start);
  if (config.deterministic) result.timings = StageTimings{};
  return result;
}

std::string report_to_json(const PoseNormalization& result, const AlignmentConfig& config,
                           int indent) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["schema_version"] = kReportSchemaVersion;

  nlohmann::ordered_json cfg;
  cfg["frame"] = {{"z", vec_json(config.frame.z())}, {"x", vec_json(config.frame.x())}};
  cfg["horizontal_resolution_deg"] = config.horizontal_resolution;
  cfg["vertical_resolution_deg"] = config.vertical_resolution;
  cfg["threshold_fraction"] = config.threshold_fraction;
  cfg["horizontal_refine_window_deg"] = config.horizontal_refine_window;
  cfg["vertical_refine_window_deg"] = config.vertical_refine_window;
  cfg["enable_vertical"] = config.enable_vertical;
  cfg["enable_canonicalization"] = config.enable_canonicalization;
  cfg["deterministic"] = config.deterministic;
  cfg["threads"] = config.threads;
  j["config"] = cfg;

  nlohmann::ordered_json input;
  input["sample_count"] = result.sample_count;
  input["vertical_normal_count"] = result.vertical_normal_count;
  input["horizontal_normal_count"] = result.horizontal_normal_count;
  j["input"] = input;

  j["rotation_row_major"] = matrix_json(result.rotation);

  if (result.vertical) {
    const VerticalAlignment& v = *result.vertical;
    nlohmann::ordered_json jv;
    jv["z_coarse"] = vec_json(v.z_coarse.vec());
    jv["z_star"] = vec_json(v.z_star.vec());
    jv["rotation_row_major"] = matrix_json(v.rotation);
    jv["refine_fell_back"] = v.refine_fell_back;
    nlohmann::ordered_json jcl = nlohmann::ordered_json::array();
    for (const SphereCluster& c : v.clusters) {
      nlohmann::ordered_json e;
      e["cell_count"] = c.cells.size();
      e["weight"] = c.weight;
      e["direction"] = vec_json(c.direction.vec());
      e["mean_phi_deg"] = c.mean_phi;
      e["mean_theta_deg"] = c.mean_theta;
      jcl.push_back(e);
    }
    jv["clusters"] = jcl;
    j["vertical"] = jv;
  } else {
    j["vertical"] = nullptr;
  }

  {
    const HorizontalAlignment& h = result.horizontal;
    nlohmann::ordered_json jh;
    jh["gamma_coarse_deg"] = h.gamma_coarse;
    jh["gamma_refined_deg"] = h.gamma_refined;
    jh["rotation_row_major"] = matrix_json(h.rotation);
    jh["refine_fell_back"] = h.refine_fell_back;
    nlohmann::ordered_json jcl = nlohmann::ordered_json::array();
    for (const CellCluster1D& c : h.clusters) {
      nlohmann::ordered_json e;
      e["cells"] = c.cells;
      e["weight"] = c.weight;
      e["mean_angle_deg"] = c.mean_angle;
      jcl.push_back(e);
    }
    jh["clusters"] = jcl;
    j["horizontal"] = jh;
  }

  if (result.canonical) {
    const Canonicalization& c = *result.canonical;
    nlohmann::ordered_json jc;
    jc["quarter_turns"] = c.quarter_turns;
    jc["rotation_row_major"] = matrix_json(c.rotation);
    jc["extent_x_m"] = c.extent_x;
    jc["extent_y_m"] = c.extent_y;
    jc["slab_weight_low"] = c.slab_weight_low;
    jc["slab_weight_high"] = c.slab_weight_high;
    jc["extents_ambiguous"] = c.extents_ambiguous;
    jc["slabs_ambiguous"] = c.slabs_ambiguous;
    j["canonicalization"] = jc;
  } else {
    j["canonicalization"] = nullptr;
  }

  nlohmann::ordered_json jt;
  jt["vertical"] = result.timings.vertical_s;
  jt["horizontal"] = result.timings.horizontal_s;
  jt["canonicalize"] = result.timings.canonicalize_s;
  jt["total"] = result.timings.total_s;
  j["timings_s"] = jt;

  return j.dump(indent);
}

void write_report(const PoseNormalization& result, const AlignmentConfig& config,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io_error, "cannot open for writing: " + path);
  const std::string text = report_to_json(result, config);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.put('\n');
  if (!out) fail(errc::io_error, "write failed: " + path);
}

std::string histogram_to_csv(const AngleHistogram1D& hist) {
  std::string out = "cell_start_deg,weight\n";
  for (int i = 0; i < hist.cells(); ++i) {
    out += format_double(i * hist.resolution);
    out += ',';
    out += format_double(hist.weights[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

std::string sphere_grid_to_csv(const SphereGrid& grid) {
  std::string out = "phi_cell_deg,theta_cell_deg,weight\n";
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      out += format_double(c * grid.resolution);
      out += ',';
      out += format_double(r * grid.resolution);
      out += ',';
      out += format_double(grid.weights[grid.index(r, c)]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace mwpose
