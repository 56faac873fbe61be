#include "mwpose/geometry.hpp"

#include <cmath>

#include "mwpose/errors.hpp"
#include "mwpose/kernels.hpp"

namespace mwpose {

namespace {

// Faces whose area falls below this are treated as degenerate and dropped.
constexpr double kMinFaceArea = 1e-12;

// Centroid and unit normal of one face; false when the face is degenerate.
bool face_sample(const TriangleMesh& mesh, std::size_t f, Vec3* centroid, Vec3* normal,
                 double* area) {
  const auto& idx = mesh.faces[f];
  const Vec3& p0 = mesh.vertices[idx[0]];
  const Vec3& p1 = mesh.vertices[idx[1]];
  const Vec3& p2 = mesh.vertices[idx[2]];
  const Vec3 c = cross(p1 - p0, p2 - p0);
  const double len = norm(c);
  *area = 0.5 * len;
  if (*area < kMinFaceArea) return false;
  *centroid = (p0 + p1 + p2) * (1.0 / 3.0);
  *normal = c * (1.0 / len);
  return true;
}

}  // namespace

void SampleArrays::reserve(std::size_t n) {
  px.reserve(n);
  py.reserve(n);
  pz.reserve(n);
  nx.reserve(n);
  ny.reserve(n);
  nz.reserve(n);
  w.reserve(n);
  src.reserve(n);
}

void SampleArrays::push_back(const Vec3& p, const Vec3& n, double weight, std::uint32_t source) {
  px.push_back(p.x);
  py.push_back(p.y);
  pz.push_back(p.z);
  nx.push_back(n.x);
  ny.push_back(n.y);
  nz.push_back(n.z);
  w.push_back(weight);
  src.push_back(source);
}

double GeometrySet::total_weight() const {
  return kernels::active().weighted_sum(samples.w.data(), samples.w.size());
}

GeometrySet mesh_to_samples(std::shared_ptr<const TriangleMesh> mesh) {
  if (!mesh || mesh->faces.empty()) fail(errc::empty_geometry, "mesh has no faces");
  GeometrySet set;
  set.provenance = Provenance::mesh;
  set.mesh = mesh;
  set.samples.reserve(mesh->faces.size());
  for (std::size_t f = 0; f < mesh->faces.size(); ++f) {
    Vec3 centroid, normal;
    double area;
    if (!face_sample(*mesh, f, &centroid, &normal, &area)) {
      ++set.degenerate_faces_dropped;
      continue;
    }
    set.samples.push_back(centroid, normal, area, static_cast<std::uint32_t>(f));
  }
  if (set.samples.size() == 0)
    fail(errc::empty_geometry, "mesh has only degenerate faces");
  return set;
}

GeometrySet mesh_to_samples(const TriangleMesh& mesh) {
  return mesh_to_samples(std::make_shared<const TriangleMesh>(mesh));
}

GeometrySet cloud_to_samples(std::shared_ptr<const PointCloud> cloud) {
  if (!cloud || cloud->points.empty()) fail(errc::empty_geometry, "point cloud is empty");
  if (!cloud->has_normals())
    fail(errc::missing_normals, "point cloud has no normals; estimate them first");
  const auto& points = cloud->points;
  const auto& normals = *cloud->normals;
  if (normals.size() != points.size())
    fail(errc::missing_normals, "normal count does not match point count");
  GeometrySet set;
  set.provenance = Provenance::point_cloud;
  set.cloud = cloud;
  set.samples.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double len = norm(normals[i]);
    if (len < 1e-12) continue;  // unusable normal; skip the point
    set.samples.push_back(points[i], normals[i] * (1.0 / len), 1.0,
                          static_cast<std::uint32_t>(i));
  }
  if (set.samples.size() == 0)
    fail(errc::missing_normals, "point cloud has only zero-length normals");
  return set;
}

GeometrySet cloud_to_samples(const PointCloud& cloud) {
  return cloud_to_samples(std::make_shared<const PointCloud>(cloud));
}

GeometrySet apply_rotation(const GeometrySet& set, const RotationMatrix3& R) {
  GeometrySet out;
  out.provenance = set.provenance;
  out.degenerate_faces_dropped = set.degenerate_faces_dropped;
  const std::size_t n = set.samples.size();

  if (set.provenance == Provenance::mesh && set.mesh) {
    // Rotate the vertices, then rebuild each sample's centroid and normal
    // from them. Weights (areas) are copied: rotation preserves them.
    auto mesh = std::make_shared<TriangleMesh>();
    mesh->faces = set.mesh->faces;
    mesh->vertices.resize(set.mesh->vertices.size());
    for (std::size_t i = 0; i < mesh->vertices.size(); ++i)
      mesh->vertices[i] = R.apply(set.mesh->vertices[i]);
    out.mesh = mesh;
    out.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t f = set.samples.src[i];
      Vec3 centroid, normal;
      double area;
      if (!face_sample(*mesh, f, &centroid, &normal, &area)) {
        // Only reachable through rounding on a borderline-degenerate face:
        // keep the sample with its directly rotated normal.
        centroid = R.apply(
            {set.samples.px[i], set.samples.py[i], set.samples.pz[i]});
        normal = R.apply({set.samples.nx[i], set.samples.ny[i], set.samples.nz[i]});
      }
      out.samples.push_back(centroid, normal, set.samples.w[i], f);
    }
    return out;
  }

  // Point-cloud provenance: rotate sample columns with the batch kernel and
  // mirror the rotation into the source cloud for re-export.
  out.samples = set.samples;
  const auto& k = kernels::active();
  if (n > 0) {
    k.rotate3(out.samples.px.data(), out.samples.py.data(), out.samples.pz.data(), n, R.m.data(),
              out.samples.px.data(), out.samples.py.data(), out.samples.pz.data());
    k.rotate3(out.samples.nx.data(), out.samples.ny.data(), out.samples.nz.data(), n, R.m.data(),
              out.samples.nx.data(), out.samples.ny.data(), out.samples.nz.data());
  }
  if (set.cloud) {
    auto cloud = std::make_shared<PointCloud>();
    cloud->points.resize(set.cloud->points.size());
    for (std::size_t i = 0; i < cloud->points.size(); ++i)
      cloud->points[i] = R.apply(set.cloud->points[i]);
    if (set.cloud->has_normals()) {
      std::vector<Vec3> normals(set.cloud->normals->size());
      for (std::size_t i = 0; i < normals.size(); ++i)
        normals[i] = R.apply((*set.cloud->normals)[i]);
      cloud->normals = std::move(normals);
    }
    out.cloud = cloud;
  }
  return out;
}

}  // namespace mwpose
