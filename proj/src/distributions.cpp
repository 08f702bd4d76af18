#include "wans/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wans/error.hpp"

namespace wans {
namespace {

void check_alphabet(std::size_t alphabet_size) {
  if (alphabet_size == 0 || alphabet_size > kMaxAlphabet) {
    throw Error(ErrorCode::kOutOfRange,
                "alphabet size " + std::to_string(alphabet_size) + " not in [1, 256]");
  }
}

// Kahan-compensated sum; alphabets of 256 terms otherwise lose ~1e-14.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace

Distribution::Distribution(std::size_t alphabet_size, std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)) {
  check_alphabet(alphabet_size);
  if (counts_.size() != alphabet_size) {
    throw Error(ErrorCode::kInvalidArgument, "count vector length " + std::to_string(counts_.size()) +
                                                 " != alphabet size " + std::to_string(alphabet_size));
  }
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

Distribution Distribution::uniform(std::size_t alphabet_size, std::uint64_t count_per_symbol) {
  return Distribution(alphabet_size, std::vector<std::uint64_t>(alphabet_size, count_per_symbol));
}

std::size_t Distribution::present_symbols() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(counts_.begin(), counts_.end(), [](std::uint64_t c) { return c > 0; }));
}

double Distribution::prob(std::size_t symbol) const {
  if (symbol >= counts_.size()) {
    throw Error(ErrorCode::kOutOfRange, "symbol " + std::to_string(symbol));
  }
  if (total_ == 0) return 0.0;
  return static_cast<double>(counts_[symbol]) / static_cast<double>(total_);
}

std::vector<double> Distribution::probs() const {
  std::vector<double> out(counts_.size(), 0.0);
  if (total_ == 0) return out;
  for (std::size_t s = 0; s < counts_.size(); ++s) {
    out[s] = static_cast<double>(counts_[s]) / static_cast<double>(total_);
  }
  return out;
}

Distribution Distribution::without_zeros() const {
  std::vector<std::uint64_t> kept;
  for (auto c : counts_) {
    if (c > 0) kept.push_back(c);
  }
  if (kept.empty()) throw Error(ErrorCode::kUndefinedEntropy, "distribution has no mass");
  const std::size_t n = kept.size();
  return Distribution(n, std::move(kept));
}

Distribution histogram(std::span<const Symbol> symbols, std::size_t alphabet_size) {
  check_alphabet(alphabet_size);
  std::vector<std::uint64_t> counts(alphabet_size, 0);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto s = symbols[i];
    if (s >= alphabet_size) {
      throw Error(ErrorCode::kOutOfRange, "symbol " + std::to_string(s) + " at index " +
                                              std::to_string(i) + " >= alphabet size " +
                                              std::to_string(alphabet_size));
    }
    ++counts[s];
  }
  return Distribution(alphabet_size, std::move(counts));
}

double shannon_entropy(const Distribution& dist) {
  if (dist.total() == 0) throw Error(ErrorCode::kUndefinedEntropy, "empty distribution");
  const double total = static_cast<double>(dist.total());
  KahanSum acc;
  for (auto c : dist.counts()) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    acc.add(-p * std::log2(p));
  }
  return std::max(0.0, acc.value());
}

double entropy_bound_bytes(const Distribution& dist, std::uint64_t count) {
  return shannon_entropy(dist) * static_cast<double>(count) / 8.0;
}

double delta_h_bound(const Distribution& dist, std::size_t table_size) {
  if (dist.total() == 0) throw Error(ErrorCode::kUndefinedEntropy, "empty distribution");
  if (table_size < dist.alphabet_size()) {
    throw Error(ErrorCode::kTableTooSmall, "table size " + std::to_string(table_size) +
                                               " < alphabet size " +
                                               std::to_string(dist.alphabet_size()));
  }
  const auto p = dist.probs();
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (p[s] == 0.0) {
      throw Error(ErrorCode::kZeroProbability, "symbol " + std::to_string(s) + " has p = 0");
    }
  }
  const double p_min = *std::min_element(p.begin(), p.end());
  KahanSum acc;
  for (double ps : p) {
    const double t = ps / (2.0 * p_min) + 0.5;
    acc.add(t * t / ps);
  }
  const double l = static_cast<double>(table_size);
  return acc.value() / (l * l * std::log(4.0));
}

}  // namespace wans
