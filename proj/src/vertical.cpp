#include "mwpose/vertical.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <utility>

#include "kernels/atan_poly.hpp"
#include "mwpose/errors.hpp"
#include "mwpose/kernels.hpp"
#include "mwpose/parallel.hpp"

namespace mwpose {
namespace {

// Grid dimensions shared by the serial and chunked build paths.
struct GridShape {
  int rows;
  int cols;
};

GridShape grid_shape(double resolution) {
  if (!(resolution > 0.0)) fail(errc::bad_resolution, "grid resolution must be positive");
  const double cols_real = 90.0 / resolution;
  const double cols_rounded = std::round(cols_real);
  if (std::fabs(cols_real - cols_rounded) > 1e-9 || cols_rounded < 1.0)
    fail(errc::bad_resolution,
         "grid resolution must divide 90 evenly, got " + std::to_string(resolution));
  const int rows =
      static_cast<int>(std::ceil(defaults::kInclinationExtentDeg / resolution - 1e-9));
  return {std::max(rows, 1), static_cast<int>(cols_rounded)};
}

int clamp_cell(double angle, double resolution, int cells) {
  int cell = static_cast<int>(std::floor(angle / resolution));
  if (cell < 0) cell = 0;
  if (cell >= cells) cell = cells - 1;
  return cell;
}

// Joins n (unit, already flipped upward) to the first cluster whose running
// mean lies within the tolerance, else opens a new cluster.
void insert_normal(std::vector<NormalCluster>& cell, const Vec3& n, double w) {
  const double cos_tol = std::cos(deg_to_rad(defaults::kNormalClusterToleranceDeg));
  for (NormalCluster& c : cell) {
    if (dot(n, c.mean_sum) >= cos_tol * norm(c.mean_sum)) {
      c.mean_sum += n * w;
      c.weight += w;
      c.members += 1;
      return;
    }
  }
  cell.push_back({n * w, w, 1});
}

// Same greedy rule at cluster granularity, used when merging chunk grids.
void insert_cluster(std::vector<NormalCluster>& cell, const NormalCluster& incoming) {
  const double cos_tol = std::cos(deg_to_rad(defaults::kNormalClusterToleranceDeg));
  for (NormalCluster& c : cell) {
    if (dot(incoming.mean_sum, c.mean_sum) >=
        cos_tol * norm(c.mean_sum) * norm(incoming.mean_sum)) {
      c.mean_sum += incoming.mean_sum;
      c.weight += incoming.weight;
      c.members += incoming.members;
      return;
    }
  }
  cell.push_back(incoming);
}

void ingest_range(std::vector<std::vector<NormalCluster>>& cells, const GridShape& shape,
                  double resolution, const SampleSubset& subset, const SphereAngleSet& angles,
                  std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end; ++i) {
    const int row = clamp_cell(angles.theta[i], resolution, shape.rows);
    const int col = clamp_cell(angles.phi[i], resolution, shape.cols);
    Vec3 n{subset.nx[i], subset.ny[i], subset.nz[i]};
    if (angles.z_dot[i] < 0.0) n = -n;
    insert_normal(cells[static_cast<std::size_t>(row) * shape.cols + col], n, subset.w[i]);
  }
}

double lower_weighted_median(std::vector<std::pair<double, double>>& values) {
  std::stable_sort(values.begin(), values.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [v, w] : values) total += w;
  double cum = 0.0;
  for (const auto& [v, w] : values) {
    cum += w;
    if (cum >= total * 0.5) return v;
  }
  return values.back().first;
}

}  // namespace

const NormalCluster* SphereGrid::retained(int r, int c) const {
  const auto& cell = clusters[index(r, c)];
  const NormalCluster* best = nullptr;
  for (const NormalCluster& cl : cell)
    if (!best || cl.weight > best->weight) best = &cl;
  return best;
}

double SphereGrid::total_weight() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

SampleSubset filter_vertical(const GeometrySet& set, const FrameConfig& frame) {
  const SampleArrays& s = set.samples;
  const std::size_t n = s.size();
  std::vector<double> dots(n);
  if (n > 0)
    kernels::active().dot_axis(s.nx.data(), s.ny.data(), s.nz.data(), n, frame.z().vec(),
                               dots.data());
  const double band = std::cos(deg_to_rad(defaults::kVerticalBandDeg));
  SampleSubset out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(dots[i]) >= band) {
      out.nx.push_back(s.nx[i]);
      out.ny.push_back(s.ny[i]);
      out.nz.push_back(s.nz[i]);
      out.w.push_back(s.w[i]);
      out.src.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (out.size() == 0) fail(errc::no_vertical_normals, "no normals within the vertical band");
  return out;
}

PolarAngles polar_angles(const UnitVec3& n, const FrameConfig& frame) {
  const double c = dot(n, frame.z());
  PolarAngles out;
  out.theta = rad_to_deg(std::acos(std::clamp(c, -1.0, 1.0)));
  if (std::fabs(c) >= 1.0 - 1e-9) {
    out.phi = 0.0;
    return out;
  }
  out.phi = rad_to_deg(std::atan2(dot(n, frame.y()), dot(n, frame.x())));
  if (out.phi >= 180.0) out.phi = -180.0;
  return out;
}

FoldedAngles fold_sphere(const PolarAngles& a) {
  FoldedAngles out;
  out.phi = std::fabs(std::fabs(a.phi) - 90.0);
  if (out.phi >= 90.0) out.phi = kernels::detail::kJustBelow90;
  out.theta = 90.0 - std::fabs(a.theta - 90.0);
  return out;
}

FoldedAngles fold_direction(const UnitVec3& n, const FrameConfig& frame) {
  const Vec3& v = n.vec();
  double phi, theta;
  kernels::detail::sphere_one(dot(v, frame.x()), dot(v, frame.y()), dot(v, frame.z()), &phi,
                              &theta);
  return {phi, theta};
}

SphereAngleSet sphere_angles(const SampleSubset& subset, const FrameConfig& frame, int threads) {
  const std::size_t n = subset.size();
  SphereAngleSet out;
  out.phi.resize(n);
  out.theta.resize(n);
  out.z_dot.resize(n);
  out.weights = subset.w;
  out.src = subset.src;
  const kernels::Backend& k = kernels::active();
  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    k.sphere_fold(subset.nx.data() + begin, subset.ny.data() + begin, subset.nz.data() + begin,
                  end - begin, frame.x().vec(), frame.y().vec(), frame.z().vec(),
                  out.phi.data() + begin, out.theta.data() + begin, out.z_dot.data() + begin);
  });
  out.total_weight = n > 0 ? k.weighted_sum(out.weights.data(), n) : 0.0;
  return out;
}

SphereGrid build_sphere_grid(const SampleSubset& subset, const FrameConfig& frame,
                             double resolution, int threads) {
  const GridShape shape = grid_shape(resolution);
  SphereGrid grid;
  grid.resolution = resolution;
  grid.frame = frame;
  grid.rows = shape.rows;
  grid.cols = shape.cols;
  const std::size_t ncells = static_cast<std::size_t>(shape.rows) * shape.cols;
  grid.clusters.assign(ncells, {});

  const SphereAngleSet angles = sphere_angles(subset, frame, threads);
  const std::size_t n = subset.size();
  const std::size_t chunks = chunk_count(n);

  if (effective_threads(threads) <= 1 || chunks <= 1) {
    ingest_range(grid.clusters, shape, resolution, subset, angles, 0, n);
  } else {
    std::vector<std::vector<std::vector<NormalCluster>>> partial(chunks);
    parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
      partial[c].assign(ncells, {});
      ingest_range(partial[c], shape, resolution, subset, angles, begin, end);
    });
    for (std::size_t c = 0; c < chunks; ++c)
      for (std::size_t cell = 0; cell < ncells; ++cell)
        for (const NormalCluster& cl : partial[c][cell]) insert_cluster(grid.clusters[cell], cl);
  }

  grid.weights.assign(ncells, 0.0);
  for (int r = 0; r < shape.rows; ++r) {
    for (int c = 0; c < shape.cols; ++c) {
      const NormalCluster* best = grid.retained(r, c);
      grid.weights[grid.index(r, c)] = best ? best->weight : 0.0;
    }
  }
  return grid;
}

std::vector<SphereCluster> cluster_sphere_peaks(const SphereGrid& grid, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    fail(errc::bad_config, "peak threshold fraction must lie in (0, 1]");
  std::vector<SphereCluster> out;
  const std::size_t ncells = grid.weights.size();
  if (ncells == 0) return out;
  double max_w = 0.0;
  for (double w : grid.weights) max_w = std::max(max_w, w);
  if (max_w <= 0.0) return out;
  const double cutoff = fraction * max_w;

  std::vector<char> marked(ncells), visited(ncells, 0);
  for (std::size_t i = 0; i < ncells; ++i) marked[i] = grid.weights[i] >= cutoff;

  for (std::size_t seed = 0; seed < ncells; ++seed) {
    if (!marked[seed] || visited[seed]) continue;
    SphereCluster cluster;
    std::deque<std::size_t> queue{seed};
    visited[seed] = 1;
    while (!queue.empty()) {
      const std::size_t cell = queue.front();
      queue.pop_front();
      cluster.cells.push_back(cell);
      const int r = static_cast<int>(cell) / grid.cols;
      const int c = static_cast<int>(cell) % grid.cols;
      auto push = [&](int rr, int cc) {
        if (rr < 0 || rr >= grid.rows) return;
        const std::size_t j = grid.index(rr, (cc + grid.cols) % grid.cols);
        if (marked[j] && !visited[j]) {
          visited[j] = 1;
          queue.push_back(j);
        }
      };
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          if (dr != 0 || dc != 0) push(r + dr, c + dc);
      if (r == 0)
        for (int cc = 0; cc < grid.cols; ++cc) push(0, cc);  // pole: whole row touches
    }
    std::sort(cluster.cells.begin(), cluster.cells.end());
    Vec3 dir_sum{};
    for (std::size_t cell : cluster.cells) {
      const NormalCluster* best =
          grid.retained(static_cast<int>(cell) / grid.cols, static_cast<int>(cell) % grid.cols);
      cluster.weight += grid.weights[cell];
      if (best) dir_sum += best->mean().vec() * best->weight;
    }
    cluster.direction = UnitVec3::of(dir_sum);
    const FoldedAngles folded = fold_direction(cluster.direction, grid.frame);
    cluster.mean_phi = folded.phi;
    cluster.mean_theta = folded.theta;
    out.push_back(std::move(cluster));
  }
  std::stable_sort(out.begin(), out.end(), [](const SphereCluster& a, const SphereCluster& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.mean_theta != b.mean_theta) return a.mean_theta < b.mean_theta;
    return a.mean_phi < b.mean_phi;
  });
  return out;
}

UnitVec3 coarse_vertical_axis(const SphereCluster& cluster, const SphereGrid& grid) {
  Vec3 sum{};
  for (std::size_t cell : cluster.cells) {
    const NormalCluster* best =
        grid.retained(static_cast<int>(cell) / grid.cols, static_cast<int>(cell) % grid.cols);
    if (best) sum += best->mean().vec() * best->weight;
  }
  return UnitVec3::of(sum);
}

UnitVec3 refine_vertical_axis(const SampleSubset& subset, const UnitVec3& z0, double window,
                              bool* fell_back) {
  // Tangent basis: cross z0 with the coordinate axis it is least aligned with.
  const Vec3& z = z0.vec();
  Vec3 e{1, 0, 0};
  double smallest = std::fabs(z.x);
  if (std::fabs(z.y) < smallest) {
    e = {0, 1, 0};
    smallest = std::fabs(z.y);
  }
  if (std::fabs(z.z) < smallest) e = {0, 0, 1};
  const Vec3 u = normalized(cross(e, z));
  const Vec3 v = cross(z, u);

  std::vector<std::pair<double, double>> us, vs;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    Vec3 n{subset.nx[i], subset.ny[i], subset.nz[i]};
    double d = dot(n, z);
    if (d < 0.0) {
      n = -n;
      d = -d;
    }
    const double angle = rad_to_deg(std::acos(std::clamp(d, -1.0, 1.0)));
    if (angle > window) continue;
    us.emplace_back(dot(n, u), subset.w[i]);
    vs.emplace_back(dot(n, v), subset.w[i]);
  }
  if (fell_back) *fell_back = us.empty();
  if (us.empty()) return z0;
  const double mu = lower_weighted_median(us);
  const double mv = lower_weighted_median(vs);
  const double rest = std::sqrt(std::max(0.0, 1.0 - mu * mu - mv * mv));
  return UnitVec3::of(u * mu + v * mv + z * rest);
}

VerticalAlignment align_vertical(const GeometrySet& set, const FrameConfig& frame,
                                 const VerticalOptions& opts) {
  const SampleSubset subset = filter_vertical(set, frame);
  VerticalAlignment result;
  result.grid = build_sphere_grid(subset, frame, opts.resolution, opts.threads);
  result.clusters = cluster_sphere_peaks(result.grid, opts.threshold_fraction);
  if (result.clusters.empty())
    fail(errc::no_vertical_normals, "vertical grid holds no weight");
  result.z_coarse = coarse_vertical_axis(result.clusters.front(), result.grid);
  result.z_star =
      refine_vertical_axis(subset, result.z_coarse, opts.refine_window, &result.refine_fell_back);
  result.rotation = rotation_aligning(result.z_star, frame.z());
  result.normal_count = subset.size();
  return result;
}

}  // namespace mwpose
