#pragma once

#include <cstdint>
#include <vector>

#include "mwpose/defaults.hpp"
#include "mwpose/frame.hpp"
#include "mwpose/geometry.hpp"
#include "mwpose/horizontal.hpp"  // SampleSubset

namespace mwpose {

struct VerticalOptions {
  double resolution = defaults::kSphereResolutionDeg;
  double threshold_fraction = defaults::kPeakThresholdFraction;
  double refine_window = defaults::kRefineWindowDeg;
  int threads = 0;  // 0 = auto
};

// Spherical angles of a direction in the working frame: azimuth phi measured
// from x toward y in [-180,180], inclination theta from z in [0,180].
// At the poles (|<n,z>| within 1e-9 of 1) phi is fixed to 0.
struct PolarAngles {
  double phi = 0.0;
  double theta = 0.0;
};

// Angles folded into the repeating wedge: phi in [0,90), theta in [0,90].
// Antipodal directions fold to bitwise-identical values.
struct FoldedAngles {
  double phi = 0.0;
  double theta = 0.0;
};

// Folded angles for every sample of a filtered subset (batch kernel output).
struct SphereAngleSet {
  std::vector<double> phi;     // folded azimuth, [0,90)
  std::vector<double> theta;   // folded inclination, [0,90]
  std::vector<double> z_dot;   // raw <n, frame z>, sign tells up/down
  std::vector<double> weights;
  std::vector<std::uint32_t> src;
  double total_weight = 0.0;
  std::size_t size() const { return phi.size(); }
};

// Group of near-parallel normals inside one grid cell. Members are flipped
// upward (<n, frame z> >= 0) before joining, so the mean always points up.
struct NormalCluster {
  Vec3 mean_sum;               // weighted sum of flipped member normals
  double weight = 0.0;
  std::uint64_t members = 0;
  UnitVec3 mean() const { return UnitVec3::of(mean_sum); }
};

// Accumulation grid over the folded wedge. Row r covers inclination
// [r*res, (r+1)*res), column c covers azimuth likewise; only inclinations up
// to the vertical band extent are represented (rows = ceil(40/res); rim
// values that fold epsilon past the band clamp into the last row). Within a
// cell, normals are greedily grouped: a sample joins the first existing
// cluster whose mean lies within 2 degrees, else opens a new one. The cell's
// weight is the weight of its heaviest cluster only; minority groups (e.g.
// distinct directions that happen to fold together) stay listed but do not
// count toward peaks.
struct SphereGrid {
  double resolution = defaults::kSphereResolutionDeg;
  FrameConfig frame;  // frame the angles were folded in
  int rows = 0;
  int cols = 0;
  std::vector<double> weights;                       // retained weight, row-major
  std::vector<std::vector<NormalCluster>> clusters;  // per cell, creation order

  std::size_t index(int r, int c) const { return static_cast<std::size_t>(r) * cols + c; }
  double at(int r, int c) const { return weights[index(r, c)]; }
  // Heaviest cluster of a cell (ties: first created), nullptr when empty.
  const NormalCluster* retained(int r, int c) const;
  double total_weight() const;
};

// Connected group of above-threshold cells on the folded wedge.
struct SphereCluster {
  std::vector<std::size_t> cells;  // row-major cell indices, ascending
  double weight = 0.0;             // sum of member retained weights
  UnitVec3 direction;              // weighted mean of member retained means
  double mean_theta = 0.0;         // folded angles of `direction`, tie-break keys
  double mean_phi = 0.0;
};

struct VerticalAlignment {
  UnitVec3 z_coarse;
  UnitVec3 z_star;  // refined vertical estimate in input coordinates
  std::vector<SphereCluster> clusters;  // ranked by weight
  RotationMatrix3 rotation;             // turns z_star onto the frame z axis
  SphereGrid grid;
  bool refine_fell_back = false;  // empty refinement window; z_star = z_coarse
  std::size_t normal_count = 0;   // samples in the vertical band
};

// Samples whose normals lie within 40 degrees of +-z, inclusive.
SampleSubset filter_vertical(const GeometrySet& set, const FrameConfig& frame);

PolarAngles polar_angles(const UnitVec3& n, const FrameConfig& frame);

// phi -> ||phi| - 90|, theta -> 90 - |theta - 90|. The azimuth fold attains
// 90 only for directions in the xz plane; those clamp to the largest double
// below 90 so they stay inside the top azimuth cell.
FoldedAngles fold_sphere(const PolarAngles& a);

// Fused fold of a direction: computes the folded angles from |<n,x>|, |<n,y>|,
// |<n,z>| directly, so n and -n give bitwise-identical results. Agrees with
// fold_sphere(polar_angles(n)) to within 1e-9 degrees.
FoldedAngles fold_direction(const UnitVec3& n, const FrameConfig& frame);

// Folded angles for a filtered subset (batch kernel path).
SphereAngleSet sphere_angles(const SampleSubset& subset, const FrameConfig& frame,
                             int threads = 0);

// Folds, bins and cluster-groups every sample. resolution must divide 90
// evenly. Multi-threaded runs ingest fixed-size chunks and merge per-cell
// cluster lists in chunk order (clusters within 2 degrees merge, heaviest
// kept); threads <= 1 ingests in pure input order.
SphereGrid build_sphere_grid(const SampleSubset& subset, const FrameConfig& frame,
                             double resolution = defaults::kSphereResolutionDeg,
                             int threads = 0);

// Cells with retained weight >= fraction * max, grouped by 8-neighborhood
// adjacency. Column 0 and the last column are adjacent (azimuth wrap) and all
// row-0 cells are mutually adjacent (they meet at the pole). Ranked by weight
// (ties: smaller mean inclination, then smaller mean azimuth).
std::vector<SphereCluster> cluster_sphere_peaks(
    const SphereGrid& grid, double fraction = defaults::kPeakThresholdFraction);

// Weighted mean of the member cells' retained directions, normalized.
UnitVec3 coarse_vertical_axis(const SphereCluster& cluster, const SphereGrid& grid);

// Tangent-plane refinement: subset normals within window degrees of z0 (after
// flipping toward z0) are projected onto its tangent plane, the lower
// weighted median is taken per coordinate, and the result is re-embedded on
// the sphere. An empty window falls back to z0 and sets *fell_back.
UnitVec3 refine_vertical_axis(const SampleSubset& subset, const UnitVec3& z0,
                              double window = defaults::kRefineWindowDeg,
                              bool* fell_back = nullptr);

VerticalAlignment align_vertical(const GeometrySet& set, const FrameConfig& frame,
                                 const VerticalOptions& opts = {});

}  // namespace mwpose
