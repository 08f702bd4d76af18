#include "wans/quantizer.hpp"

#include <algorithm>
#include <cmath>

#include "wans/error.hpp"

namespace wans {

void QuantizerSpec::validate() const {
  if (bins < 3 || bins % 2 == 0 || bins > kMaxAlphabet) {
    throw Error(ErrorCode::kInvalidBins,
                "bin count " + std::to_string(bins) + " must be odd and in [3, 255]");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kDegenerateScale, "scale " + std::to_string(scale) + " must be > 0");
  }
}

double abs_percentile(std::span<const float> weights, double q) {
  if (weights.empty()) throw Error(ErrorCode::kEmptyInput, "empty tensor");
  if (!(q > 0.0 && q <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "percentile " + std::to_string(q) + " not in (0, 100]");
  }
  std::vector<float> mags(weights.size());
  std::transform(weights.begin(), weights.end(), mags.begin(), [](float w) { return std::fabs(w); });
  const auto n = static_cast<double>(mags.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, mags.size());
  auto nth = mags.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(mags.begin(), nth, mags.end());
  return *nth;
}

QuantizerSpec make_quantizer(std::span<const float> weights, std::uint32_t bins, ScalePolicy policy,
                             std::string layer_id) {
  QuantizerSpec spec;
  spec.bins = bins;
  spec.layer_id = std::move(layer_id);
  if (bins < 3 || bins % 2 == 0 || bins > kMaxAlphabet) {
    throw Error(ErrorCode::kInvalidBins,
                "bin count " + std::to_string(bins) + " must be odd and in [3, 255]");
  }
  if (weights.empty()) throw Error(ErrorCode::kEmptyInput, "empty tensor");

  if (policy.kind == ScalePolicy::Kind::kMaxAbs) {
    double m = 0.0;
    for (float w : weights) m = std::max(m, static_cast<double>(std::fabs(w)));
    spec.scale = m;
  } else {
    spec.scale = abs_percentile(weights, policy.percentile);
  }
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) {
    throw Error(ErrorCode::kDegenerateScale, "tensor '" + spec.layer_id + "' gives scale " +
                                                 std::to_string(spec.scale));
  }
  return spec;
}

Symbol quantize_value(float w, const QuantizerSpec& spec) noexcept {
  const auto half = static_cast<double>(spec.zero_symbol());
  double k = std::round(static_cast<double>(w) / spec.step());
  if (std::isnan(k)) k = 0.0;
  k = std::clamp(k, -half, half);
  return static_cast<Symbol>(static_cast<int>(k) + static_cast<int>(spec.zero_symbol()));
}

std::vector<Symbol> quantize(std::span<const float> weights, const QuantizerSpec& spec) {
  spec.validate();
  std::vector<Symbol> out(weights.size());
  std::transform(weights.begin(), weights.end(), out.begin(),
                 [&](float w) { return quantize_value(w, spec); });
  return out;
}

float dequantize_symbol(Symbol s, const QuantizerSpec& spec) noexcept {
  const int k = static_cast<int>(s) - static_cast<int>(spec.zero_symbol());
  return static_cast<float>(k * spec.step());
}

std::vector<float> dequantize(std::span<const Symbol> symbols, const QuantizerSpec& spec) {
  spec.validate();
  std::vector<float> out(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] >= spec.bins) {
      throw Error(ErrorCode::kOutOfRange, "symbol " + std::to_string(symbols[i]) + " at index " +
                                              std::to_string(i) + " >= bins " +
                                              std::to_string(spec.bins));
    }
    out[i] = dequantize_symbol(symbols[i], spec);
  }
  return out;
}

double quantization_mse(std::span<const float> weights, const QuantizerSpec& spec) {
  spec.validate();
  if (weights.empty()) throw Error(ErrorCode::kEmptyInput, "empty tensor");
  double acc = 0.0;
  for (float w : weights) {
    const double d = static_cast<double>(w) - dequantize_symbol(quantize_value(w, spec), spec);
    acc += d * d;
  }
  return acc / static_cast<double>(weights.size());
}

}  // namespace wans
