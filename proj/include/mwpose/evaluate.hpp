#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwpose/defaults.hpp"
#include "mwpose/pipeline.hpp"
#include "mwpose/rotation.hpp"

namespace mwpose {

// Deterministic per-trial random stream (SplitMix64 over a stream-salted
// seed). Identified in reports as "splitmix64-streams-v1"; the sequence is
// part of the output contract, so it must not change across platforms.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double next_unit();                   // [0,1), 53-bit resolution
  double next_angle(double bound_deg);  // uniform in [-bound, bound)

 private:
  std::uint64_t state_;
};

struct EvalOptions {
  int trials = defaults::kEvalTrials;
  std::uint64_t seed = 0;
  double tilt_bound = defaults::kEvalTiltBoundDeg;    // alpha, beta bounds
  double gamma_bound = defaults::kEvalGammaBoundDeg;  // gamma bound
  AlignmentConfig config;  // canonicalization is forced off during evaluation
};

struct TrialResult {
  int trial = 0;
  double alpha = 0.0;  // applied pose rotation angles, degrees
  double beta = 0.0;
  double gamma = 0.0;
  double vertical_error = 0.0;    // degrees, [0,180]
  double horizontal_error = 0.0;  // degrees, [0,45]
  double runtime_s = 0.0;         // normalize_pose only; 0 in deterministic mode
  bool failed = false;
  std::string error;  // failure reason when failed
};

struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (N-1)
  double median = 0.0;  // lower median
  double max = 0.0;
};

struct EvalReport {
  std::string dataset;  // label of the evaluated input (file name or scene name)
  std::size_t sample_count = 0;
  std::vector<TrialResult> trials;
  ErrorStats vertical;  // over successful trials
  ErrorStats horizontal;
  ErrorStats runtime_s;
  int vertical_outliers = 0;    // successful trials with vertical error > 5 deg
  int horizontal_outliers = 0;  // successful trials with horizontal error > 5 deg
  int failures = 0;
  std::uint64_t seed = 0;
  std::string rng;  // stream scheme identifier
};

// Pose rotation for one trial: gamma about the frame z axis first, then beta
// about y, then alpha about x, i.e. R_x(alpha) * R_y(beta) * R_z(gamma).
RotationMatrix3 trial_rotation(double alpha, double beta, double gamma,
                               const FrameConfig& frame);

// Draws (alpha, beta, gamma) from the rng and returns the trial rotation.
RotationMatrix3 random_trial_rotation(TrialRng& rng, const EvalOptions& opts,
                                      const FrameConfig& frame, double* alpha, double* beta,
                                      double* gamma);

// Residual tilt of the frame z axis after correction, degrees.
double vertical_error(const RotationMatrix3& correction, const RotationMatrix3& applied,
                      const FrameConfig& frame);

// Residual in-plane error of the frame x axis, reduced by the 90-degree
// symmetry: repeated -90 while >= 45, absolute value, so the result is in
// [0,45] degrees.
double horizontal_error(const RotationMatrix3& correction, const RotationMatrix3& applied,
                        const FrameConfig& frame);

// Rotates the set by a random pose per trial, normalizes it, and measures the
// residual errors. Failed trials are recorded, not thrown.
EvalReport run_evaluation(const GeometrySet& set, const EvalOptions& opts);

// Header alpha_deg,beta_deg,gamma_deg,delta_v_deg,delta_h_deg,runtime_s, one
// row per trial (failed trials write nan metrics), then the summary as
// trailing comment lines.
std::string eval_to_csv(const EvalReport& report);

std::string eval_to_json(const EvalReport& report, const EvalOptions& opts, int indent = 2);

}  // namespace mwpose
