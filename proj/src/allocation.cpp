#include "wans/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wans/error.hpp"

namespace wans {
namespace {

struct Bracket {
  std::int64_t lo;
  std::int64_t hi;
  double frac;
};

Bracket bracket(double lambda) {
  const double f = std::floor(lambda);
  const auto lo = static_cast<std::int64_t>(f);
  return {lo, static_cast<std::int64_t>(std::ceil(lambda)), lambda - f};
}

// Grid points for a finite difference; integral lambda uses the next point up
// unless it sits on the upper bound.
Bracket gradient_bracket(double lambda, const AllocationConfig& cfg) {
  Bracket b = bracket(lambda);
  if (b.lo == b.hi) {
    if (lambda >= cfg.lambda_max) {
      b.lo -= 1;
    } else {
      b.hi += 1;
    }
  }
  return b;
}

double lookup(const BinTable& table, std::int64_t grid, const std::string& layer, const char* what) {
  const auto it = table.find(bins_at_grid(grid));
  if (it == table.end()) {
    throw Error(ErrorCode::kMissingEntry, std::string(what) + " table of layer '" + layer + "' has no entry for " +
                                              std::to_string(bins_at_grid(grid)) + " bins");
  }
  return it->second;
}

double interpolate(const BinTable& table, double lambda, const std::string& layer, const char* what) {
  const auto b = bracket(lambda);
  const double lo = lookup(table, b.lo, layer, what);
  if (b.lo == b.hi) return lo;
  return (1.0 - b.frac) * lo + b.frac * lookup(table, b.hi, layer, what);
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::uint64_t total_weights(const PrecisionParams& p) {
  std::uint64_t n = 0;
  for (const auto& l : p.layers) n += l.weight_count;
  return n;
}

double mse_norm(const LayerPrecision& layer, const AllocationConfig& cfg) {
  return lookup(layer.mse, static_cast<std::int64_t>(cfg.lambda_min), layer.name, "mse");
}

std::vector<std::uint32_t> grid_bins(const AllocationConfig& cfg) {
  std::vector<std::uint32_t> bins;
  for (auto k = static_cast<std::int64_t>(cfg.lambda_min); k <= static_cast<std::int64_t>(cfg.lambda_max); ++k) {
    bins.push_back(bins_at_grid(k));
  }
  return bins;
}

}  // namespace

std::uint32_t bins_for_lambda(double lambda) noexcept {
  return bins_at_grid(static_cast<std::int64_t>(std::floor(lambda + 0.5)));
}

BinTable entropy_table(std::span<const float> weights, std::span<const std::uint32_t> bin_candidates,
                       ScalePolicy policy) {
  BinTable out;
  for (auto k : bin_candidates) {
    const auto spec = make_quantizer(weights, k, policy);
    out[k] = shannon_entropy(histogram(quantize(weights, spec), k));
  }
  return out;
}

BinTable mse_table(std::span<const float> weights, std::span<const std::uint32_t> bin_candidates,
                   ScalePolicy policy) {
  BinTable out;
  for (auto k : bin_candidates) out[k] = quantization_mse(weights, make_quantizer(weights, k, policy));
  return out;
}

void AllocationConfig::validate() const {
  if (!(target_bits > 0.0) || !std::isfinite(target_bits)) {
    throw Error(ErrorCode::kInvalidArgument, "entropy target must be > 0");
  }
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "iteration budget must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  if (!(beta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be >= 0");
  if (lambda_min < 1.0 || lambda_max < lambda_min || std::floor(lambda_min) != lambda_min ||
      std::floor(lambda_max) != lambda_max || lambda_max > 127.0) {
    throw Error(ErrorCode::kInvalidArgument, "lambda bounds must be integers with 1 <= min <= max <= 127");
  }
}

double interpolated_entropy_bits(const PrecisionParams& p) {
  double sum = 0.0;
  for (const auto& layer : p.layers) {
    sum += static_cast<double>(layer.weight_count) * interpolate(layer.entropy, layer.lambda, layer.name, "entropy");
  }
  return sum;
}

double entropy_loss(const PrecisionParams& p, const AllocationConfig& cfg) {
  return std::fabs(interpolated_entropy_bits(p) - cfg.target_bits) / cfg.target_bits;
}

std::vector<double> entropy_loss_grad(const PrecisionParams& p, const AllocationConfig& cfg) {
  const double direction = sign(interpolated_entropy_bits(p) - cfg.target_bits);
  std::vector<double> grad;
  grad.reserve(p.layers.size());
  for (const auto& layer : p.layers) {
    const auto b = gradient_bracket(layer.lambda, cfg);
    const double dh = lookup(layer.entropy, b.hi, layer.name, "entropy") -
                      lookup(layer.entropy, b.lo, layer.name, "entropy");
    grad.push_back(direction * static_cast<double>(layer.weight_count) / cfg.target_bits * dh);
  }
  return grad;
}

double distortion_proxy(const PrecisionParams& p, const AllocationConfig& cfg) {
  const double n = static_cast<double>(total_weights(p));
  double sum = 0.0;
  for (const auto& layer : p.layers) {
    if (layer.mse.empty()) continue;
    const double norm = mse_norm(layer, cfg);
    if (norm <= 0.0) continue;
    sum += static_cast<double>(layer.weight_count) / n * interpolate(layer.mse, layer.lambda, layer.name, "mse") / norm;
  }
  return sum;
}

std::vector<double> distortion_proxy_grad(const PrecisionParams& p, const AllocationConfig& cfg) {
  const double n = static_cast<double>(total_weights(p));
  std::vector<double> grad(p.layers.size(), 0.0);
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const auto& layer = p.layers[i];
    if (layer.mse.empty()) continue;
    const double norm = mse_norm(layer, cfg);
    if (norm <= 0.0) continue;
    const auto b = gradient_bracket(layer.lambda, cfg);
    const double dm = lookup(layer.mse, b.hi, layer.name, "mse") - lookup(layer.mse, b.lo, layer.name, "mse");
    grad[i] = static_cast<double>(layer.weight_count) / n * dm / norm;
  }
  return grad;
}

double size_criterion(const PrecisionParams& p) {
  double sum = 0.0;
  for (const auto& layer : p.layers) sum += static_cast<double>(layer.weight_count) * layer.lambda;
  return sum;
}

AllocationResult allocate(PrecisionParams params, const AllocationConfig& cfg) {
  cfg.validate();
  if (params.layers.empty()) throw Error(ErrorCode::kEmptyInput, "no layers to allocate");

  // The interpolated total is separable and piecewise linear, so its range
  // over the lambda box is spanned by per-layer extremes at grid points.
  double lowest = 0.0;
  double highest = 0.0;
  for (const auto& layer : params.layers) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (auto k = static_cast<std::int64_t>(cfg.lambda_min); k <= static_cast<std::int64_t>(cfg.lambda_max); ++k) {
      const double h = lookup(layer.entropy, k, layer.name, "entropy");
      lo = std::min(lo, h);
      hi = std::max(hi, h);
    }
    lowest += static_cast<double>(layer.weight_count) * lo;
    highest += static_cast<double>(layer.weight_count) * hi;
  }
  if (cfg.target_bits < lowest || cfg.target_bits > highest) {
    std::ostringstream msg;
    msg.precision(10);
    msg << "target " << cfg.target_bits << " bits (" << cfg.target_bits / 8.0 << " bytes) outside achievable range ["
        << lowest << ", " << highest << "] bits ([" << lowest / 8.0 << ", " << highest / 8.0 << "] bytes)";
    throw Error(ErrorCode::kInfeasibleTarget, msg.str());
  }

  for (auto& layer : params.layers) layer.lambda = cfg.lambda_max;

  AllocationResult r;
  for (int it = 0; it < cfg.iterations; ++it) {
    auto grad = entropy_loss_grad(params, cfg);
    if (cfg.beta > 0.0) {
      const auto dgrad = distortion_proxy_grad(params, cfg);
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg.beta * dgrad[i];
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
      auto& lambda = params.layers[i].lambda;
      lambda = std::clamp(lambda - cfg.learning_rate * grad[i], cfg.lambda_min, cfg.lambda_max);
    }
    r.iterations = it + 1;
  }

  r.final_loss = entropy_loss(params, cfg);
  r.interpolated_bits = interpolated_entropy_bits(params);
  r.converged = r.final_loss <= cfg.tolerance;
  for (const auto& layer : params.layers) {
    const std::uint32_t bins = bins_for_lambda(layer.lambda);
    r.bins.push_back(bins);
    r.lambdas.push_back(layer.lambda);
    r.rounded_bits += static_cast<double>(layer.weight_count) * layer.entropy.at(bins);
  }
  r.params = std::move(params);
  return r;
}

AllocationResult allocate(std::span<const AllocationLayer> layers, const AllocationConfig& cfg, ScalePolicy policy) {
  cfg.validate();
  if (layers.empty()) throw Error(ErrorCode::kEmptyInput, "no layers to allocate");
  const auto bins = grid_bins(cfg);
  PrecisionParams params;
  for (const auto& layer : layers) {
    LayerPrecision lp;
    lp.name = layer.name;
    lp.weight_count = layer.weights.size();
    lp.entropy = entropy_table(layer.weights, bins, policy);
    if (cfg.beta > 0.0) lp.mse = mse_table(layer.weights, bins, policy);
    params.layers.push_back(std::move(lp));
  }
  return allocate(std::move(params), cfg);
}

}  // namespace wans
