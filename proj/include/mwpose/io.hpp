#pragma once

#include <memory>
#include <string>

#include "mwpose/geometry.hpp"

namespace mwpose {

enum class GeomFormat { auto_detect, ply, obj };

// Either a cloud or a mesh, as decided by the file contents (PLY with a
// populated face element / OBJ with f statements load as meshes).
struct Geometry {
  std::shared_ptr<PointCloud> cloud;
  std::shared_ptr<TriangleMesh> mesh;
  bool is_mesh() const { return mesh != nullptr; }
};

struct SaveOptions {
  bool binary = true;    // PLY only; OBJ is always text
  bool float64 = false;  // export coordinates as 64-bit instead of 32-bit
};

Geometry load_geometry(const std::string& path, GeomFormat format = GeomFormat::auto_detect);
void save_geometry(const Geometry& geom, const std::string& path,
                   GeomFormat format = GeomFormat::auto_detect, const SaveOptions& opts = {});

// Converts whichever side is set into weighted oriented samples, attaching
// the source handle for later re-export.
GeometrySet to_samples(const Geometry& geom);

}  // namespace mwpose
