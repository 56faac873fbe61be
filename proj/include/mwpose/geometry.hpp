#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mwpose/rotation.hpp"
#include "mwpose/vec3.hpp"

namespace mwpose {

struct PointCloud {
  std::vector<Vec3> points;                        // meters
  std::optional<std::vector<Vec3>> normals;        // unit length when present
  bool has_normals() const { return normals.has_value(); }
};

struct TriangleMesh {
  std::vector<Vec3> vertices;                      // meters
  std::vector<std::array<std::uint32_t, 3>> faces;
};

// One geometric primitive reduced to the quantities the alignment needs.
// Normals are unoriented: n and -n mean the same surface.
struct OrientedSample {
  Vec3 position;
  UnitVec3 normal;
  double weight;
};

enum class Provenance { point_cloud, mesh };

// Structure-of-arrays sample storage; the batch kernels run directly on these
// columns. src maps each sample back to its point index (cloud) or face index
// (mesh).
struct SampleArrays {
  std::vector<double> px, py, pz;
  std::vector<double> nx, ny, nz;
  std::vector<double> w;
  std::vector<std::uint32_t> src;

  std::size_t size() const { return px.size(); }
  void reserve(std::size_t n);
  void push_back(const Vec3& p, const Vec3& n, double weight, std::uint32_t source);
};

struct GeometrySet {
  SampleArrays samples;
  Provenance provenance = Provenance::point_cloud;
  // Exactly one source handle is set, used for re-export and for recomputing
  // mesh face data after rotations.
  std::shared_ptr<const PointCloud> cloud;
  std::shared_ptr<const TriangleMesh> mesh;
  std::size_t degenerate_faces_dropped = 0;

  std::size_t size() const { return samples.size(); }
  double total_weight() const;
  OrientedSample sample(std::size_t i) const {
    return {{samples.px[i], samples.py[i], samples.pz[i]},
            UnitVec3::trusted({samples.nx[i], samples.ny[i], samples.nz[i]}),
            samples.w[i]};
  }
};

// One sample per non-degenerate face: centroid, unit face normal, area as
// weight. Faces under 1e-12 m^2 are dropped and counted.
GeometrySet mesh_to_samples(const TriangleMesh& mesh);
GeometrySet mesh_to_samples(std::shared_ptr<const TriangleMesh> mesh);

// One sample per point, weight 1.0. The cloud must carry normals.
GeometrySet cloud_to_samples(const PointCloud& cloud);
GeometrySet cloud_to_samples(std::shared_ptr<const PointCloud> cloud);

// Rotates positions and normals. Mesh provenance rotates the vertices and
// recomputes face centroids/normals from them; weights are copied unchanged.
GeometrySet apply_rotation(const GeometrySet& set, const RotationMatrix3& R);

}  // namespace mwpose
