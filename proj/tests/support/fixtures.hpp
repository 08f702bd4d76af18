#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wans/distributions.hpp"
#include "wans/tensor.hpp"

namespace wans::testing {

Tensor gaussian_tensor(const std::string& name, const Shape& shape, double sigma, std::uint64_t seed);

// Exactly counts[s] copies of each symbol s, shuffled with a fixed seed, so
// the empirical distribution equals the nominal one.
std::vector<Symbol> exact_sequence(const std::vector<std::uint64_t>& counts, std::uint64_t seed);

// i.i.d. draws over `alphabet` symbols from a random skewed distribution.
std::vector<Symbol> random_sequence(std::size_t length, std::size_t alphabet, std::uint64_t seed);

// Entropy in long double; independent of the library's Kahan summation.
long double entropy_oracle(const std::vector<std::uint64_t>& counts);

// Huffman code lengths built with a priority queue; zero counts get length 0.
// A single present symbol still costs one bit.
std::vector<int> huffman_code_lengths(const std::vector<std::uint64_t>& counts);
std::uint64_t huffman_total_bits(const std::vector<std::uint64_t>& counts);

// Four levels -a, -a/3, a/3, a and no level at zero.
std::vector<Symbol> quantize_no_zero_point(const std::vector<float>& weights, double scale);

// Eight [1024, C, 3, 3] conv layers with Gaussian weights and bins 5..13; every
// input-channel stream holds 9216 symbols.
struct SyntheticLayer {
  Tensor tensor;
  std::uint32_t bins;
};
std::vector<SyntheticLayer> synthetic_model(std::uint64_t seed = 2024);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace wans::testing
