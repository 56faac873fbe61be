#include "mwpose/kernels.hpp"

namespace mwpose::kernels {
namespace {

const Backend* widest() {
  if (const Backend* b = avx2_backend()) return b;
  return &scalar_backend();
}

// Selected once at startup (CLI flag or test setup); not synchronized against
// concurrent kernel calls.
const Backend* g_active = nullptr;

}  // namespace

const Backend& active() {
  if (g_active == nullptr) g_active = widest();
  return *g_active;
}

bool select(const std::string& name) {
  if (name == "auto") {
    g_active = widest();
    return true;
  }
  if (name == "scalar") {
    g_active = &scalar_backend();
    return true;
  }
  if (name == "avx2") {
    if (const Backend* b = avx2_backend()) {
      g_active = b;
      return true;
    }
    return false;
  }
  return false;
}

std::vector<const Backend*> available() {
  std::vector<const Backend*> out{&scalar_backend()};
  if (const Backend* b = avx2_backend()) out.push_back(b);
  return out;
}

}  // namespace mwpose::kernels
