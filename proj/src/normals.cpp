#include "mwpose/normals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mwpose/errors.hpp"
#include "mwpose/parallel.hpp"

namespace mwpose {
namespace {

// Kd-tree over point indices; each subtree owns a contiguous slice of the
// permutation with its median element as the node. Ties split on the point
// index so the tree is a pure function of the input order.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), order_(pts.size()), axis_(pts.size()) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::uint32_t>(i);
    build(0, order_.size());
  }

  // k nearest neighbors of pts[query], excluding the query point itself,
  // ordered by (distance, index).
  void nearest(std::uint32_t query, std::size_t k,
               std::vector<std::pair<double, std::uint32_t>>& heap) const {
    heap.clear();
    search(0, order_.size(), query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
  }

 private:
  static double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; }

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= 1) return;
    Vec3 mn = pts_[order_[lo]], mx = mn;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const Vec3& p = pts_[order_[i]];
      mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
      mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
    }
    const Vec3 ext = mx - mn;
    int axis = 0;
    if (ext.y > coord(ext, axis)) axis = 1;
    if (ext.z > coord(ext, axis)) axis = 2;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = coord(pts_[a], axis), cb = coord(pts_[b], axis);
                       return ca < cb || (ca == cb && a < b);
                     });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid);
    build(mid + 1, hi);
  }

  void search(std::size_t lo, std::size_t hi, std::uint32_t query, std::size_t k,
              std::vector<std::pair<double, std::uint32_t>>& heap) const {
    if (lo >= hi) return;
    const std::size_t mid = (lo + hi) / 2;
    const std::uint32_t node = order_[mid];
    const Vec3& q = pts_[query];
    if (node != query) {
      const Vec3 d = pts_[node] - q;
      const double d2 = d.x * d.x + d.y * d.y + d.z * d.z;
      const std::pair<double, std::uint32_t> cand{d2, node};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    if (hi - lo == 1) return;
    const int axis = axis_[mid];
    const double delta = coord(q, axis) - coord(pts_[node], axis);
    const bool left_first = delta < 0.0 || (delta == 0.0 && query < node);
    const auto visit = [&](bool left) {
      if (left)
        search(lo, mid, query, k, heap);
      else
        search(mid + 1, hi, query, k, heap);
    };
    visit(left_first);
    if (heap.size() < k || delta * delta <= heap.front().first) visit(!left_first);
  }

  const std::vector<Vec3>& pts_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> axis_;
};

// Cyclic Jacobi diagonalization of a symmetric 3x3 matrix; returns the unit
// eigenvector of the smallest eigenvalue.
Vec3 smallest_eigenvector(double a00, double a01, double a02, double a11, double a12,
                          double a22) {
  double a[3][3] = {{a00, a01, a02}, {a01, a11, a12}, {a02, a12, a22}};
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int sweep = 0; sweep < 50; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < 3; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < 3; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < 3; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }
  int best = 0;
  if (a[1][1] < a[best][best]) best = 1;
  if (a[2][2] < a[best][best]) best = 2;
  Vec3 n{v[0][best], v[1][best], v[2][best]};
  const double len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
  if (len == 0.0) return {0.0, 0.0, 1.0};
  return n / len;
}

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (std::int64_t c : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      h *= 0xBF58476D1CE4E5B9ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud estimate_normals(const PointCloud& cloud, int k, int threads) {
  if (k < 3) fail(errc::too_few_points, "normal estimation needs k >= 3");
  const std::size_t n = cloud.points.size();
  if (n < static_cast<std::size_t>(k) + 1)
    fail(errc::too_few_points, "normal estimation needs at least k+1 points, got " +
                                   std::to_string(n) + " for k=" + std::to_string(k));

  const KdTree tree(cloud.points);
  PointCloud out;
  out.points = cloud.points;
  out.normals.emplace(n);

  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<std::pair<double, std::uint32_t>> heap;
    heap.reserve(static_cast<std::size_t>(k));
    for (std::size_t i = begin; i < end; ++i) {
      tree.nearest(static_cast<std::uint32_t>(i), static_cast<std::size_t>(k), heap);
      Vec3 mean = cloud.points[i];
      for (const auto& [d2, idx] : heap) mean = mean + cloud.points[idx];
      mean = mean / static_cast<double>(heap.size() + 1);
      double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
      const auto accumulate = [&](const Vec3& p) {
        const Vec3 d = p - mean;
        a00 += d.x * d.x;
        a01 += d.x * d.y;
        a02 += d.x * d.z;
        a11 += d.y * d.y;
        a12 += d.y * d.z;
        a22 += d.z * d.z;
      };
      accumulate(cloud.points[i]);
      for (const auto& [d2, idx] : heap) accumulate(cloud.points[idx]);
      (*out.normals)[i] = smallest_eigenvector(a00, a01, a02, a11, a12, a22);
    }
  });
  return out;
}

PointCloud grid_subsample(const PointCloud& cloud, double cell_meters) {
  if (!(cell_meters > 0.0)) fail(errc::bad_config, "subsample cell size must be positive");
  PointCloud out;
  if (cloud.has_normals()) out.normals.emplace();
  std::unordered_map<VoxelKey, char, VoxelHash> seen;
  seen.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x / cell_meters)),
                       static_cast<std::int64_t>(std::floor(p.y / cell_meters)),
                       static_cast<std::int64_t>(std::floor(p.z / cell_meters))};
    if (!seen.emplace(key, 0).second) continue;
    out.points.push_back(p);
    if (out.normals) out.normals->push_back((*cloud.normals)[i]);
  }
  return out;
}

}  // namespace mwpose
