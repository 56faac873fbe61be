#pragma once

#include <stdexcept>
#include <string>

namespace mwpose {

enum class errc {
  parse_error,
  unsupported_format,
  io_error,
  empty_geometry,
  missing_normals,
  too_few_points,
  degenerate_vector,
  antipodal_input,
  bad_resolution,
  bad_config,
  no_horizontal_normals,
  no_vertical_normals,
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::parse_error: return "parse_error";
    case errc::unsupported_format: return "unsupported_format";
    case errc::io_error: return "io_error";
    case errc::empty_geometry: return "empty_geometry";
    case errc::missing_normals: return "missing_normals";
    case errc::too_few_points: return "too_few_points";
    case errc::degenerate_vector: return "degenerate_vector";
    case errc::antipodal_input: return "antipodal_input";
    case errc::bad_resolution: return "bad_resolution";
    case errc::bad_config: return "bad_config";
    case errc::no_horizontal_normals: return "no_horizontal_normals";
    case errc::no_vertical_normals: return "no_vertical_normals";
  }
  return "unknown";
}

}  // namespace mwpose
