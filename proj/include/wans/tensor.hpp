#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wans {

using Shape = std::vector<std::uint32_t>;

// Product of dims; an empty shape has no elements here (rank >= 1 is required
// everywhere a shape is accepted).
std::uint64_t element_count(std::span<const std::uint32_t> shape) noexcept;

std::string shape_to_string(std::span<const std::uint32_t> shape);

// Row-major float32 tensor.
struct Tensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

}  // namespace wans
