#pragma once

#include <cstdint>
#include <vector>

#include "mwpose/defaults.hpp"
#include "mwpose/frame.hpp"
#include "mwpose/geometry.hpp"

namespace mwpose {

// Normals and weights of a filtered sample subset, compacted for the batch
// kernels. src holds the originating sample indices.
struct SampleSubset {
  std::vector<double> nx, ny, nz;
  std::vector<double> w;
  std::vector<std::uint32_t> src;
  std::size_t size() const { return nx.size(); }
};

struct HorizontalOptions {
  double resolution = defaults::kHistogramResolutionDeg;
  double threshold_fraction = defaults::kPeakThresholdFraction;
  double refine_window = defaults::kRefineWindowDeg;
  int threads = 0;  // 0 = auto
};

// Per-sample horizontal angles. Raw angles are signed (clockwise-positive
// around z, see signed_angle_around_axis); folded angles live in [0,90).
struct HorizontalAngleSet {
  std::vector<double> folded;
  std::vector<double> raw;
  std::vector<double> weights;
  std::vector<std::uint32_t> src;
  double total_weight = 0.0;
  std::size_t size() const { return folded.size(); }
};

struct AngleHistogram1D {
  double resolution = defaults::kHistogramResolutionDeg;
  std::vector<double> weights;        // one weight sum per cell
  std::vector<std::uint64_t> counts;  // samples contributing per cell
  int cells() const { return static_cast<int>(weights.size()); }
  double total_weight() const;
  int max_cell() const;  // heaviest cell, smallest index under ties
};

// Contiguous (wrap-aware) run of above-threshold cells.
struct CellCluster1D {
  std::vector<int> cells;
  double weight = 0.0;
  double mean_angle = 0.0;  // weighted mean of member cell centers, in [0,90)
};

struct HorizontalAlignment {
  // Angle of the dominant Manhattan direction counterclockwise from the frame
  // x axis, folded to [0,90). The correction rotation below turns the data by
  // -gamma_refined about z so that direction lands on a coordinate axis.
  double gamma_coarse = 0.0;
  double gamma_refined = 0.0;
  std::vector<CellCluster1D> clusters;  // ranked; angles in the folded histogram domain
  RotationMatrix3 rotation;
  AngleHistogram1D histogram;
  bool refine_fell_back = false;  // empty refinement window; gamma_refined = gamma_coarse
  std::size_t normal_count = 0;   // samples in the horizontal band
};

struct ManhattanFrame {
  double gamma = 0.0;    // counterclockwise from frame x, [0,90)
  double support = 0.0;  // summed sample weight of the cluster
};

// Samples whose normals lie within [45,135] degrees of z, inclusive.
SampleSubset filter_horizontal(const GeometrySet& set, const FrameConfig& frame);

// Folds [-180,180) to [0,90): +180 if negative, then -90 if above 90.
// Exact 90 maps to 0 to keep the half-open codomain.
double fold_to_quarter(double gamma_deg);

// Raw + folded angles for a filtered subset (batch kernel path).
HorizontalAngleSet horizontal_angles(const SampleSubset& subset, const FrameConfig& frame,
                                     int threads = 0);

// resolution must divide 90 evenly. Cell index = floor(folded / resolution).
AngleHistogram1D build_histogram(const HorizontalAngleSet& angles, double resolution,
                                 int threads = 0);

// Cells with weight >= fraction * max form wrap-aware contiguous clusters,
// sorted by weight descending (ties: smaller mean angle).
std::vector<CellCluster1D> threshold_and_cluster(
    const AngleHistogram1D& hist, double fraction = defaults::kPeakThresholdFraction);

// Weighted mean of member cell centers, unwrapped mod 90 around the heaviest
// member, folded back to [0,90).
double coarse_gamma(const CellCluster1D& cluster, const AngleHistogram1D& hist);

// Lower weighted median of folded angles within +-window of gamma0 (mod 90).
// An empty window falls back to gamma0 and sets *fell_back.
double refine_gamma(const HorizontalAngleSet& angles, double gamma0,
                    double window = defaults::kRefineWindowDeg, bool* fell_back = nullptr);

HorizontalAlignment align_horizontal(const GeometrySet& set, const FrameConfig& frame,
                                     const HorizontalOptions& opts = {});

// One entry per detected Manhattan frame; entries closer than 2 degrees
// (mod 90) are merged into the heavier one. Ranked by support.
std::vector<ManhattanFrame> list_manhattan_frames(const GeometrySet& set,
                                                  const FrameConfig& frame, double fraction,
                                                  const HorizontalOptions& opts = {});

}  // namespace mwpose
