#pragma once

#include <optional>
#include <string>

#include "mwpose/canonicalize.hpp"
#include "mwpose/defaults.hpp"
#include "mwpose/errors.hpp"
#include "mwpose/frame.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/horizontal.hpp"
#include "mwpose/vertical.hpp"

namespace mwpose {

struct AlignmentConfig {
  FrameConfig frame;
  double horizontal_resolution = defaults::kHistogramResolutionDeg;
  double vertical_resolution = defaults::kSphereResolutionDeg;
  double threshold_fraction = defaults::kPeakThresholdFraction;
  double horizontal_refine_window = defaults::kRefineWindowDeg;
  double vertical_refine_window = defaults::kRefineWindowDeg;
  bool enable_vertical = true;
  bool enable_canonicalization = false;
  bool deterministic = false;  // single-threaded, zeroed timings, stable output bytes
  int threads = 0;             // 0 = auto (ignored when deterministic)
};

// Wall-clock stage durations in seconds. All zero in deterministic mode so
// that repeated runs produce byte-identical reports.
struct StageTimings {
  double vertical_s = 0.0;
  double horizontal_s = 0.0;
  double canonicalize_s = 0.0;
  double total_s = 0.0;
};

struct PoseNormalization {
  RotationMatrix3 rotation;  // full correction: canon * horizontal * vertical
  std::optional<VerticalAlignment> vertical;
  HorizontalAlignment horizontal;
  std::optional<Canonicalization> canonical;
  StageTimings timings;
  std::size_t sample_count = 0;
  std::size_t vertical_normal_count = 0;
  std::size_t horizontal_normal_count = 0;
};

// Thrown when a stage cannot proceed (e.g. no normals in a band). Carries
// whatever stages completed so callers can still report diagnostics.
class PipelineError : public Error {
 public:
  PipelineError(errc code, const std::string& what, PoseNormalization partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const PoseNormalization& partial() const { return partial_; }

 private:
  PoseNormalization partial_;
};

// Runs vertical leveling (unless disabled), horizontal alignment, and
// optional canonicalization on a copy of the sample normals/positions.
// The input set is not modified.
PoseNormalization normalize_pose(const GeometrySet& set, const AlignmentConfig& config = {});

// Serializes a normalization result as a versioned JSON report.
std::string report_to_json(const PoseNormalization& result, const AlignmentConfig& config,
                           int indent = 2);

// report_to_json written to a file; throws io_error on failure.
void write_report(const PoseNormalization& result, const AlignmentConfig& config,
                  const std::string& path);

// CSV dumps of the stage diagnostics: one row per histogram cell / grid cell.
std::string histogram_to_csv(const AngleHistogram1D& hist);
std::string sphere_grid_to_csv(const SphereGrid& grid);

}  // namespace mwpose
