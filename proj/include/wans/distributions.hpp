#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wans {

// Symbol ids fit one byte: alphabets never exceed 256 entries.
using Symbol = std::uint8_t;

inline constexpr std::size_t kMaxAlphabet = 256;

// Occurrence counts over an alphabet of at most 256 symbols.
class Distribution {
 public:
  Distribution(std::size_t alphabet_size, std::vector<std::uint64_t> counts);

  static Distribution uniform(std::size_t alphabet_size, std::uint64_t count_per_symbol = 1);

  std::size_t alphabet_size() const noexcept { return counts_.size(); }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t present_symbols() const noexcept;

  double prob(std::size_t symbol) const;
  std::vector<double> probs() const;

  // Drops zero-count symbols, keeping the relative order of the others.
  Distribution without_zeros() const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

Distribution histogram(std::span<const Symbol> symbols, std::size_t alphabet_size);

// Bits per symbol, -sum p log2 p over present symbols.
double shannon_entropy(const Distribution& dist);

// H(dist) * count / 8. Reporting converts to MB with 1 MB = 1e6 bytes.
double entropy_bound_bytes(const Distribution& dist, std::uint64_t count);

inline constexpr double kBytesPerMegabyte = 1e6;

// Leading-order tANS rate-gap bound in bits/symbol for a table of l states:
//   1/(l^2 ln 4) * sum_s (1/p_s) (p_s / (2 min p) + 1/2)^2
// The O(l^-3) remainder is not included, so treat it as a reference scale.
double delta_h_bound(const Distribution& dist, std::size_t table_size);

}  // namespace wans
