#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wans/distributions.hpp"

namespace wans {

// Symmetric uniform quantizer with a level exactly at zero. `scale` is the
// half-range a: levels are -a + k * step, step = 2a / (bins - 1).
struct QuantizerSpec {
  std::uint32_t bins = 3;
  double scale = 1.0;
  std::string layer_id;

  double step() const noexcept { return 2.0 * scale / static_cast<double>(bins - 1); }
  std::uint32_t zero_symbol() const noexcept { return (bins - 1) / 2; }

  // Throws kInvalidBins / kDegenerateScale.
  void validate() const;

  friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;
};

// Bin count of the 8-bit path for layers kept uncompressed. 255 is the
// largest odd count whose symbols fit a byte.
inline constexpr std::uint32_t kRawLayerBins = 255;

struct ScalePolicy {
  enum class Kind { kMaxAbs, kPercentile };
  Kind kind = Kind::kMaxAbs;
  double percentile = 100.0;  // only for kPercentile, in (0, 100]

  static ScalePolicy max_abs() { return {}; }
  static ScalePolicy at_percentile(double q) { return {Kind::kPercentile, q}; }
};

// Nearest-rank percentile of |w|: the ceil(q/100 * n)-th smallest magnitude.
double abs_percentile(std::span<const float> weights, double q);

QuantizerSpec make_quantizer(std::span<const float> weights, std::uint32_t bins,
                             ScalePolicy policy = ScalePolicy::max_abs(),
                             std::string layer_id = {});

// Round half away from zero, clip to the outer levels, shift by the zero point.
Symbol quantize_value(float w, const QuantizerSpec& spec) noexcept;

std::vector<Symbol> quantize(std::span<const float> weights, const QuantizerSpec& spec);

float dequantize_symbol(Symbol s, const QuantizerSpec& spec) noexcept;

std::vector<float> dequantize(std::span<const Symbol> symbols, const QuantizerSpec& spec);

double quantization_mse(std::span<const float> weights, const QuantizerSpec& spec);

}  // namespace wans
