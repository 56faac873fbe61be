#include "mwpose/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include "mwpose/errors.hpp"

namespace mwpose {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(errc::io_error, "read failed: " + path);
  return std::move(buf).str();
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& msg) {
  fail(errc::parse_error, path + ":" + std::to_string(line) + ": " + msg);
}

std::string lower_ext(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  const std::size_t sep = path.find_last_of("/\\");
  if (dot == std::string::npos || (sep != std::string::npos && dot < sep)) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

GeomFormat resolve_format(const std::string& path, GeomFormat format,
                          const std::string* content) {
  if (format != GeomFormat::auto_detect) return format;
  const std::string ext = lower_ext(path);
  if (ext == "ply") return GeomFormat::ply;
  if (ext == "obj") return GeomFormat::obj;
  if (content && content->rfind("ply", 0) == 0) return GeomFormat::ply;
  fail(errc::unsupported_format,
       path + ": cannot determine format (supported: .ply, .obj)");
}

// Splits text into lines; keeps 1-based numbering and strips trailing \r.
class LineReader {
 public:
  LineReader(std::string_view text, std::size_t start_offset, std::size_t start_line)
      : text_(text), pos_(start_offset), line_(start_line) {}

  bool next(std::string_view* out) {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      *out = line;
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_;
  std::size_t line_;
};

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double token_to_double(std::string_view tok, const std::string& path, std::size_t line) {
  char buf[64];
  if (tok.size() >= sizeof(buf)) parse_fail(path, line, "number token too long");
  std::memcpy(buf, tok.data(), tok.size());
  buf[tok.size()] = '\0';
  char* end = nullptr;
  const double v = std::strtod(buf, &end);
  if (end != buf + tok.size()) parse_fail(path, line, "bad number '" + std::string(tok) + "'");
  return v;
}

// ---------------------------------------------------------------- PLY input

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType ply_type(std::string_view t, const std::string& path, std::size_t line) {
  if (t == "char" || t == "int8") return PlyType::i8;
  if (t == "uchar" || t == "uint8") return PlyType::u8;
  if (t == "short" || t == "int16") return PlyType::i16;
  if (t == "ushort" || t == "uint16") return PlyType::u16;
  if (t == "int" || t == "int32") return PlyType::i32;
  if (t == "uint" || t == "uint32") return PlyType::u32;
  if (t == "float" || t == "float32") return PlyType::f32;
  if (t == "double" || t == "float64") return PlyType::f64;
  parse_fail(path, line, "unknown property type '" + std::string(t) + "'");
}

std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8: return 1;
    case PlyType::i16:
    case PlyType::u16: return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32: return 4;
    case PlyType::f64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  PlyType count_type = PlyType::u8;  // list properties only
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

// Cursor over the binary payload with offset-carrying errors.
class BinReader {
 public:
  BinReader(std::string_view payload, std::size_t base_offset, const std::string& path)
      : data_(payload), base_(base_offset), path_(path) {}

  double read(PlyType t) {
    const std::size_t size = ply_type_size(t);
    if (pos_ + size > data_.size())
      fail(errc::parse_error, path_ + ": unexpected end of binary data at byte " +
                                  std::to_string(base_ + pos_));
    const char* p = data_.data() + pos_;
    pos_ += size;
    switch (t) {
      case PlyType::i8: return static_cast<double>(static_cast<signed char>(*p));
      case PlyType::u8: return static_cast<double>(static_cast<unsigned char>(*p));
      case PlyType::i16: {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return v;
      }
      case PlyType::u16: {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return v;
      }
      case PlyType::i32: {
        std::int32_t v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case PlyType::u32: {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case PlyType::f32: {
        float v;
        std::memcpy(&v, p, 4);
        return v;
      }
      case PlyType::f64: {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
    }
    return 0.0;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t base_;
  const std::string& path_;
};

int prop_index(const PlyElement& el, std::string_view name) {
  for (std::size_t i = 0; i < el.props.size(); ++i)
    if (el.props[i].name == name) return static_cast<int>(i);
  return -1;
}

void append_triangle(TriangleMesh& mesh, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                     std::size_t nverts, const std::string& path, std::size_t line) {
  if (a >= nverts || b >= nverts || c >= nverts) {
    if (line == 0) fail(errc::parse_error, path + ": face index out of range");
    parse_fail(path, line, "face index out of range");
  }
  if (a == b || b == c || a == c) return;  // repeated-index face: drop
  mesh.faces.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                        static_cast<std::uint32_t>(c)});
}

Geometry load_ply(const std::string& path, const std::string& content) {
  LineReader header(content, 0, 0);
  std::string_view line;
  if (!header.next(&line) || line != "ply") parse_fail(path, 1, "missing 'ply' magic");
  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  std::size_t header_end = 0;
  while (true) {
    if (!header.next(&line)) parse_fail(path, header.line(), "missing end_header");
    const auto tok = split_tokens(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) parse_fail(path, header.line(), "malformed format line");
      if (tok[1] == "ascii") {
        binary = false;
      } else if (tok[1] == "binary_little_endian") {
        binary = true;
      } else if (tok[1] == "binary_big_endian") {
        fail(errc::unsupported_format, path + ": big-endian PLY is not supported");
      } else {
        parse_fail(path, header.line(), "unknown format '" + std::string(tok[1]) + "'");
      }
      format_seen = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) parse_fail(path, header.line(), "malformed element line");
      PlyElement el;
      el.name = std::string(tok[1]);
      el.count = static_cast<std::size_t>(token_to_double(tok[2], path, header.line()));
      elements.push_back(std::move(el));
    } else if (tok[0] == "property") {
      if (elements.empty()) parse_fail(path, header.line(), "property before element");
      PlyProperty prop;
      if (tok.size() >= 2 && tok[1] == "list") {
        if (tok.size() != 5) parse_fail(path, header.line(), "malformed list property");
        prop.is_list = true;
        prop.count_type = ply_type(tok[2], path, header.line());
        prop.type = ply_type(tok[3], path, header.line());
        prop.name = std::string(tok[4]);
      } else {
        if (tok.size() != 3) parse_fail(path, header.line(), "malformed property line");
        prop.type = ply_type(tok[1], path, header.line());
        prop.name = std::string(tok[2]);
      }
      elements.back().props.push_back(std::move(prop));
    } else if (tok[0] == "end_header") {
      // Find the byte just past this line in the raw content.
      header_end = content.find("end_header", 0);
      header_end = content.find('\n', header_end);
      if (header_end == std::string::npos) parse_fail(path, header.line(), "truncated header");
      ++header_end;
      break;
    } else {
      parse_fail(path, header.line(), "unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!format_seen) parse_fail(path, header.line(), "missing format line");

  auto cloud = std::make_shared<PointCloud>();
  auto mesh = std::make_shared<TriangleMesh>();
  bool has_faces = false;

  LineReader body(content, header_end, header.line());
  BinReader bin(std::string_view(content).substr(header_end), header_end, path);

  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    const int ix = prop_index(el, "x"), iy = prop_index(el, "y"), iz = prop_index(el, "z");
    const int inx = prop_index(el, "nx"), iny = prop_index(el, "ny"),
              inz = prop_index(el, "nz");
    const bool wants_normals = inx >= 0 && iny >= 0 && inz >= 0;
    if (is_vertex) {
      if (ix < 0 || iy < 0 || iz < 0)
        parse_fail(path, header.line(), "vertex element lacks x/y/z properties");
      cloud->points.reserve(el.count);
      if (wants_normals) cloud->normals.emplace();
      if (wants_normals) cloud->normals->reserve(el.count);
    }
    int ilist = -1;
    if (is_face) {
      ilist = prop_index(el, "vertex_indices");
      if (ilist < 0) ilist = prop_index(el, "vertex_index");
      if (ilist < 0) parse_fail(path, header.line(), "face element lacks vertex_indices");
      has_faces = has_faces || el.count > 0;
      mesh->faces.reserve(mesh->faces.size() + el.count);
    }

    std::vector<double> scalars(el.props.size(), 0.0);
    std::vector<std::uint64_t> indices;
    for (std::size_t inst = 0; inst < el.count; ++inst) {
      indices.clear();
      if (binary) {
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const PlyProperty& prop = el.props[p];
          if (prop.is_list) {
            const auto count = static_cast<std::size_t>(bin.read(prop.count_type));
            for (std::size_t j = 0; j < count; ++j) {
              const double v = bin.read(prop.type);
              if (static_cast<int>(p) == ilist)
                indices.push_back(static_cast<std::uint64_t>(v));
            }
          } else {
            scalars[p] = bin.read(prop.type);
          }
        }
      } else {
        std::string_view data_line;
        // Skip blank lines between instances; some exporters emit them.
        do {
          if (!body.next(&data_line))
            parse_fail(path, body.line(), "unexpected end of file in element " + el.name);
        } while (split_tokens(data_line).empty());
        const auto tok = split_tokens(data_line);
        std::size_t cursor = 0;
        auto take = [&]() -> double {
          if (cursor >= tok.size())
            parse_fail(path, body.line(), "too few values in element " + el.name);
          return token_to_double(tok[cursor++], path, body.line());
        };
        for (std::size_t p = 0; p < el.props.size(); ++p) {
          const PlyProperty& prop = el.props[p];
          if (prop.is_list) {
            const auto count = static_cast<std::size_t>(take());
            for (std::size_t j = 0; j < count; ++j) {
              const double v = take();
              if (static_cast<int>(p) == ilist)
                indices.push_back(static_cast<std::uint64_t>(v));
            }
          } else {
            scalars[p] = take();
          }
        }
      }

      if (is_vertex) {
        cloud->points.push_back({scalars[ix], scalars[iy], scalars[iz]});
        if (wants_normals)
          cloud->normals->push_back({scalars[inx], scalars[iny], scalars[inz]});
      } else if (is_face) {
        const std::size_t body_line = binary ? 0 : body.line();
        if (indices.size() >= 3)
          for (std::size_t j = 1; j + 1 < indices.size(); ++j)
            append_triangle(*mesh, indices[0], indices[j], indices[j + 1],
                            cloud->points.size(), path, body_line);
      }
    }
  }

  Geometry geom;
  if (has_faces) {
    mesh->vertices = std::move(cloud->points);
    geom.mesh = std::move(mesh);
  } else {
    geom.cloud = std::move(cloud);
  }
  return geom;
}

// ---------------------------------------------------------------- OBJ input

Geometry load_obj(const std::string& path, const std::string& content) {
  auto cloud = std::make_shared<PointCloud>();
  auto mesh = std::make_shared<TriangleMesh>();
  std::vector<Vec3> vn;
  LineReader body(content, 0, 0);
  std::string_view line;
  std::vector<std::uint64_t> face;
  while (body.next(&line)) {
    const auto tok = split_tokens(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) parse_fail(path, body.line(), "v needs 3 coordinates");
      cloud->points.push_back({token_to_double(tok[1], path, body.line()),
                               token_to_double(tok[2], path, body.line()),
                               token_to_double(tok[3], path, body.line())});
    } else if (tok[0] == "vn") {
      if (tok.size() < 4) parse_fail(path, body.line(), "vn needs 3 coordinates");
      vn.push_back({token_to_double(tok[1], path, body.line()),
                    token_to_double(tok[2], path, body.line()),
                    token_to_double(tok[3], path, body.line())});
    } else if (tok[0] == "f") {
      if (tok.size() < 4) parse_fail(path, body.line(), "f needs at least 3 vertices");
      face.clear();
      for (std::size_t t = 1; t < tok.size(); ++t) {
        std::string_view ref = tok[t];
        const std::size_t slash = ref.find('/');
        if (slash != std::string_view::npos) ref = ref.substr(0, slash);
        const double raw = token_to_double(ref, path, body.line());
        long long idx = static_cast<long long>(raw);
        if (idx < 0)
          idx += static_cast<long long>(cloud->points.size());  // relative reference
        else
          idx -= 1;  // OBJ indices are 1-based
        if (idx < 0 || idx >= static_cast<long long>(cloud->points.size()))
          parse_fail(path, body.line(), "face index out of range");
        face.push_back(static_cast<std::uint64_t>(idx));
      }
      for (std::size_t j = 1; j + 1 < face.size(); ++j)
        append_triangle(*mesh, face[0], face[j], face[j + 1], cloud->points.size(), path,
                        body.line());
    }
    // Other statements (vt, o, g, s, usemtl, mtllib, l, p) carry nothing the
    // alignment needs and are skipped.
  }

  Geometry geom;
  if (!mesh->faces.empty()) {
    mesh->vertices = std::move(cloud->points);
    geom.mesh = std::move(mesh);
  } else {
    if (vn.size() == cloud->points.size() && !vn.empty()) cloud->normals = std::move(vn);
    geom.cloud = std::move(cloud);
  }
  return geom;
}

// -------------------------------------------------------------------- output

void format_double(std::string& out, double v, bool f64) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), f64 ? "%.17g" : "%.9g", v);
  out += buf;
}

void append_le(std::string& out, const void* p, std::size_t size) {
  out.append(static_cast<const char*>(p), size);
}

void append_float(std::string& out, double v, bool f64) {
  if (f64) {
    append_le(out, &v, 8);
  } else {
    const float f = static_cast<float>(v);
    append_le(out, &f, 4);
  }
}

void save_ply(const Geometry& geom, const std::string& path, const SaveOptions& opts) {
  const bool is_mesh = geom.is_mesh();
  const std::vector<Vec3>& pts = is_mesh ? geom.mesh->vertices : geom.cloud->points;
  const bool normals = !is_mesh && geom.cloud->has_normals();
  const char* scalar = opts.float64 ? "double" : "float";

  std::string out;
  out += "ply\n";
  out += opts.binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(pts.size()) + "\n";
  for (const char* c : {"x", "y", "z"})
    out += std::string("property ") + scalar + " " + c + "\n";
  if (normals)
    for (const char* c : {"nx", "ny", "nz"})
      out += std::string("property ") + scalar + " " + c + "\n";
  if (is_mesh) {
    out += "element face " + std::to_string(geom.mesh->faces.size()) + "\n";
    out += "property list uchar uint vertex_indices\n";
  }
  out += "end_header\n";

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& p = pts[i];
    const Vec3 n = normals ? (*geom.cloud->normals)[i] : Vec3{};
    if (opts.binary) {
      append_float(out, p.x, opts.float64);
      append_float(out, p.y, opts.float64);
      append_float(out, p.z, opts.float64);
      if (normals) {
        append_float(out, n.x, opts.float64);
        append_float(out, n.y, opts.float64);
        append_float(out, n.z, opts.float64);
      }
    } else {
      format_double(out, p.x, opts.float64);
      out += ' ';
      format_double(out, p.y, opts.float64);
      out += ' ';
      format_double(out, p.z, opts.float64);
      if (normals) {
        out += ' ';
        format_double(out, n.x, opts.float64);
        out += ' ';
        format_double(out, n.y, opts.float64);
        out += ' ';
        format_double(out, n.z, opts.float64);
      }
      out += '\n';
    }
  }
  if (is_mesh) {
    for (const auto& f : geom.mesh->faces) {
      if (opts.binary) {
        const unsigned char count = 3;
        append_le(out, &count, 1);
        for (std::uint32_t idx : f) append_le(out, &idx, 4);
      } else {
        out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
               std::to_string(f[2]) + "\n";
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(errc::io_error, "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(errc::io_error, "write failed: " + path);
}

void save_obj(const Geometry& geom, const std::string& path, const SaveOptions& opts) {
  const bool is_mesh = geom.is_mesh();
  const std::vector<Vec3>& pts = is_mesh ? geom.mesh->vertices : geom.cloud->points;
  std::string out;
  for (const Vec3& p : pts) {
    out += "v ";
    format_double(out, p.x, opts.float64);
    out += ' ';
    format_double(out, p.y, opts.float64);
    out += ' ';
    format_double(out, p.z, opts.float64);
    out += '\n';
  }
  if (!is_mesh && geom.cloud->has_normals()) {
    for (const Vec3& n : *geom.cloud->normals) {
      out += "vn ";
      format_double(out, n.x, opts.float64);
      out += ' ';
      format_double(out, n.y, opts.float64);
      out += ' ';
      format_double(out, n.z, opts.float64);
      out += '\n';
    }
  }
  if (is_mesh) {
    for (const auto& f : geom.mesh->faces)
      out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
             std::to_string(f[2] + 1) + "\n";
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(errc::io_error, "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) fail(errc::io_error, "write failed: " + path);
}

}  // namespace

Geometry load_geometry(const std::string& path, GeomFormat format) {
  const std::string content = read_file(path);
  switch (resolve_format(path, format, &content)) {
    case GeomFormat::ply: return load_ply(path, content);
    case GeomFormat::obj: return load_obj(path, content);
    default: fail(errc::unsupported_format, path + ": unsupported format");
  }
}

void save_geometry(const Geometry& geom, const std::string& path, GeomFormat format,
                   const SaveOptions& opts) {
  if (!geom.cloud && !geom.mesh) fail(errc::empty_geometry, "nothing to save");
  switch (resolve_format(path, format, nullptr)) {
    case GeomFormat::ply: save_ply(geom, path, opts); return;
    case GeomFormat::obj: save_obj(geom, path, opts); return;
    default: fail(errc::unsupported_format, path + ": unsupported format");
  }
}

GeometrySet to_samples(const Geometry& geom) {
  if (geom.is_mesh()) return mesh_to_samples(geom.mesh);
  if (geom.cloud) return cloud_to_samples(geom.cloud);
  fail(errc::empty_geometry, "geometry holds neither points nor faces");
}

}  // namespace mwpose
