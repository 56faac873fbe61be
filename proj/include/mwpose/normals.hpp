#pragma once

#include "mwpose/defaults.hpp"
#include "mwpose/geometry.hpp"

namespace mwpose {

// Plane-fit normal estimation: each point's normal is the smallest
// eigenvector of the covariance of the point and its k nearest neighbors.
// Orientation is arbitrary (downstream treats n and -n as equivalent).
// Deterministic for a fixed input order regardless of thread count.
PointCloud estimate_normals(const PointCloud& cloud, int k = defaults::kNormalEstimationK,
                            int threads = 0);

// Voxel-grid subsampling: keeps the first point (in input order) of every
// occupied cell; normals follow their points.
PointCloud grid_subsample(const PointCloud& cloud, double cell_meters);

}  // namespace mwpose
