#include "wans/tensor.hpp"

namespace wans {

std::uint64_t element_count(std::span<const std::uint32_t> shape) noexcept {
  if (shape.empty()) return 0;
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(std::span<const std::uint32_t> shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

}  // namespace wans
