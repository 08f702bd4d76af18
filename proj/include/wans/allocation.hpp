#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wans/quantizer.hpp"

namespace wans {

// Odd bin count k -> bits/symbol (or MSE) measured on a layer.
using BinTable = std::map<std::uint32_t, double>;

// Precision lambda indexes odd bin counts: integral lambda maps to 2*lambda + 1
// bins (6 -> 13, 15 -> 31).
constexpr std::uint32_t bins_at_grid(std::int64_t lambda) noexcept {
  return static_cast<std::uint32_t>(2 * lambda + 1);
}

// Nearest grid point, halves rounded up; always odd.
std::uint32_t bins_for_lambda(double lambda) noexcept;

BinTable entropy_table(std::span<const float> weights, std::span<const std::uint32_t> bin_candidates,
                       ScalePolicy policy = ScalePolicy::max_abs());

BinTable mse_table(std::span<const float> weights, std::span<const std::uint32_t> bin_candidates,
                   ScalePolicy policy = ScalePolicy::max_abs());

struct LayerPrecision {
  std::string name;
  double lambda = 15.0;
  std::uint64_t weight_count = 0;
  BinTable entropy;
  BinTable mse;  // optional; used by the distortion proxy only
};

struct PrecisionParams {
  std::vector<LayerPrecision> layers;
};

struct AllocationConfig {
  double target_bits = 0.0;  // total entropy goal, bits
  double beta = 1.0;         // weight of the distortion proxy
  double learning_rate = 1.0;
  int iterations = 500;
  double lambda_min = 1.0;  // integral bounds; [1, 15] -> [3, 31] bins
  double lambda_max = 15.0;
  double tolerance = 0.05;  // relative entropy error accepted as converged

  void validate() const;
};

// Sum over layers of |W| * H interpolated between the bracketing grid points.
double interpolated_entropy_bits(const PrecisionParams& p);

// |interpolated total - target| / target. Throws kMissingEntry when a
// bracketing bin count is absent from a layer's table.
double entropy_loss(const PrecisionParams& p, const AllocationConfig& cfg);

// d loss / d lambda per layer: sign(S - target) * |W| / target * (H_ceil - H_floor).
// At integral lambda the right-hand difference is used (left at lambda_max).
std::vector<double> entropy_loss_grad(const PrecisionParams& p, const AllocationConfig& cfg);

// Mean over layers, weighted by |W|, of interpolated MSE normalised by the
// layer's MSE at the coarsest bin count.
double distortion_proxy(const PrecisionParams& p, const AllocationConfig& cfg);
std::vector<double> distortion_proxy_grad(const PrecisionParams& p, const AllocationConfig& cfg);

// Size criterion of the bits-per-weight formulation: sum of |W| * lambda_W.
double size_criterion(const PrecisionParams& p);

struct AllocationLayer {
  std::string name;
  std::span<const float> weights;
};

struct AllocationResult {
  std::vector<std::uint32_t> bins;
  std::vector<double> lambdas;
  PrecisionParams params;           // final lambdas with the measured tables
  double interpolated_bits = 0.0;   // at the final continuous lambdas
  double rounded_bits = 0.0;        // at the returned bin counts
  double final_loss = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Builds the tables, checks the target lies within the achievable range
// (kInfeasibleTarget otherwise), starts every layer at lambda_max and runs
// projected gradient descent on entropy_loss + beta * distortion_proxy.
AllocationResult allocate(std::span<const AllocationLayer> layers, const AllocationConfig& cfg,
                          ScalePolicy policy = ScalePolicy::max_abs());

// Same loop over precomputed tables; lambdas in `params` are overwritten.
AllocationResult allocate(PrecisionParams params, const AllocationConfig& cfg);

}  // namespace wans
