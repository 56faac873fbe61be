#include "mwpose/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <vector>

#include "json.hpp"
#include "mwpose/version.hpp"

namespace mwpose {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ErrorStats stats_of(std::vector<double> values) {
  ErrorStats s;
  const std::size_t n = values.size();
  if (n == 0) return s;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(n - 1));
  }
  std::sort(values.begin(), values.end());
  s.median = values[(n - 1) / 2];
  return s;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

// The stream origin is scrambled so that streams with adjacent indices do
// not share consecutive generator states (which would replay one trial's
// draws, shifted, in the next trial).
TrialRng::TrialRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + kGolden * (stream + 1))) {}

std::uint64_t TrialRng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double TrialRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double TrialRng::next_angle(double bound_deg) {
  return -bound_deg + 2.0 * bound_deg * next_unit();
}

RotationMatrix3 trial_rotation(double alpha, double beta, double gamma,
                               const FrameConfig& frame) {
  return rotation_about_axis(frame.x(), alpha) *
         (rotation_about_axis(frame.y(), beta) * rotation_about_axis(frame.z(), gamma));
}

RotationMatrix3 random_trial_rotation(TrialRng& rng, const EvalOptions& opts,
                                      const FrameConfig& frame, double* alpha, double* beta,
                                      double* gamma) {
  const double a = rng.next_angle(opts.tilt_bound);
  const double b = rng.next_angle(opts.tilt_bound);
  const double g = rng.next_angle(opts.gamma_bound);
  if (alpha) *alpha = a;
  if (beta) *beta = b;
  if (gamma) *gamma = g;
  return trial_rotation(a, b, g, frame);
}

double vertical_error(const RotationMatrix3& correction, const RotationMatrix3& applied,
                      const FrameConfig& frame) {
  const RotationMatrix3 residual = correction * applied;
  return angle_between(UnitVec3::of(residual.apply(frame.z())), frame.z());
}

double horizontal_error(const RotationMatrix3& correction, const RotationMatrix3& applied,
                        const FrameConfig& frame) {
  const RotationMatrix3 residual = correction * applied;
  double d = angle_between(UnitVec3::of(residual.apply(frame.x())), frame.x());
  while (d >= 45.0) d -= 90.0;
  return std::fabs(d);
}

EvalReport run_evaluation(const GeometrySet& set, const EvalOptions& opts) {
  if (opts.trials < 1) fail(errc::bad_config, "evaluation needs at least one trial");
  AlignmentConfig cfg = opts.config;
  cfg.enable_canonicalization = false;  // the metric itself mods out quarter-turns

  EvalReport report;
  report.sample_count = set.size();
  report.seed = opts.seed;
  report.rng = kRngName;
  report.trials.reserve(static_cast<std::size_t>(opts.trials));

  std::vector<double> dv, dh, rt;
  for (int t = 0; t < opts.trials; ++t) {
    TrialRng rng(opts.seed, static_cast<std::uint64_t>(t));
    TrialResult row;
    row.trial = t;
    const RotationMatrix3 pose =
        random_trial_rotation(rng, opts, cfg.frame, &row.alpha, &row.beta, &row.gamma);
    const GeometrySet rotated = apply_rotation(set, pose);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const PoseNormalization result = normalize_pose(rotated, cfg);
      row.runtime_s =
          cfg.deterministic
              ? 0.0
              : std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.vertical_error = vertical_error(result.rotation, pose, cfg.frame);
      row.horizontal_error = horizontal_error(result.rotation, pose, cfg.frame);
      dv.push_back(row.vertical_error);
      dh.push_back(row.horizontal_error);
      rt.push_back(row.runtime_s);
      if (row.vertical_error > 5.0) ++report.vertical_outliers;
      if (row.horizontal_error > 5.0) ++report.horizontal_outliers;
    } catch (const Error& e) {
      row.failed = true;
      row.error = e.what();
      ++report.failures;
    }
    report.trials.push_back(std::move(row));
  }
  report.vertical = stats_of(std::move(dv));
  report.horizontal = stats_of(std::move(dh));
  report.runtime_s = stats_of(std::move(rt));
  return report;
}

std::string eval_to_csv(const EvalReport& report) {
  std::string out = "alpha_deg,beta_deg,gamma_deg,delta_v_deg,delta_h_deg,runtime_s\n";
  const double nan = std::nan("");
  for (const TrialResult& t : report.trials) {
    out += format_double(t.alpha);
    out += ',';
    out += format_double(t.beta);
    out += ',';
    out += format_double(t.gamma);
    out += ',';
    out += format_double(t.failed ? nan : t.vertical_error);
    out += ',';
    out += format_double(t.failed ? nan : t.horizontal_error);
    out += ',';
    out += format_double(t.failed ? nan : t.runtime_s);
    out += '\n';
  }
  const auto stat_lines = [&](const char* label, const ErrorStats& s) {
    out += std::string("# mean_") + label + ": " + format_double(s.mean) + "\n";
    out += std::string("# stddev_") + label + ": " + format_double(s.stddev) + "\n";
    out += std::string("# median_") + label + ": " + format_double(s.median) + "\n";
    out += std::string("# max_") + label + ": " + format_double(s.max) + "\n";
  };
  out += "# dataset: " + report.dataset + "\n";
  out += "# samples: " + std::to_string(report.sample_count) + "\n";
  out += "# trials: " + std::to_string(report.trials.size()) + "\n";
  out += "# failures: " + std::to_string(report.failures) + "\n";
  stat_lines("delta_v_deg", report.vertical);
  stat_lines("delta_h_deg", report.horizontal);
  stat_lines("runtime_s", report.runtime_s);
  out += "# outliers_delta_v_gt5deg: " + std::to_string(report.vertical_outliers) + "\n";
  out += "# outliers_delta_h_gt5deg: " + std::to_string(report.horizontal_outliers) + "\n";
  out += "# seed: " + std::to_string(report.seed) + "\n";
  out += "# rng: " + report.rng + "\n";
  return out;
}

std::string eval_to_json(const EvalReport& report, const EvalOptions& opts, int indent) {
  nlohmann::ordered_json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["schema_version"] = kReportSchemaVersion;
  j["dataset"] = report.dataset;
  j["sample_count"] = report.sample_count;
  j["seed"] = report.seed;
  j["rng"] = report.rng;
  j["trial_count"] = report.trials.size();
  j["tilt_bound_deg"] = opts.tilt_bound;
  j["gamma_bound_deg"] = opts.gamma_bound;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const TrialResult& t : report.trials) {
    nlohmann::ordered_json e;
    e["trial"] = t.trial;
    e["alpha_deg"] = t.alpha;
    e["beta_deg"] = t.beta;
    e["gamma_deg"] = t.gamma;
    if (t.failed) {
      e["delta_v_deg"] = nullptr;
      e["delta_h_deg"] = nullptr;
      e["runtime_s"] = nullptr;
      e["error"] = t.error;
    } else {
      e["delta_v_deg"] = t.vertical_error;
      e["delta_h_deg"] = t.horizontal_error;
      e["runtime_s"] = t.runtime_s;
    }
    rows.push_back(e);
  }
  j["trials"] = rows;

  const auto stats_json = [](const ErrorStats& s) {
    nlohmann::ordered_json e;
    e["mean"] = s.mean;
    e["stddev"] = s.stddev;
    e["median"] = s.median;
    e["max"] = s.max;
    return e;
  };
  j["delta_v_deg"] = stats_json(report.vertical);
  j["delta_h_deg"] = stats_json(report.horizontal);
  j["runtime_s"] = stats_json(report.runtime_s);
  j["outliers_delta_v_gt5deg"] = report.vertical_outliers;
  j["outliers_delta_h_gt5deg"] = report.horizontal_outliers;
  j["failures"] = report.failures;
  return j.dump(indent);
}

}  // namespace mwpose
