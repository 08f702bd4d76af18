#include "support/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <queue>
#include <random>

#include <unistd.h>

namespace wans::testing {

Tensor gaussian_tensor(const std::string& name, const Shape& shape, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Tensor t{name, shape, std::vector<float>(element_count(shape))};
  for (auto& v : t.values) v = static_cast<float>(normal(rng));
  return t;
}

std::vector<Symbol> exact_sequence(const std::vector<std::uint64_t>& counts, std::uint64_t seed) {
  std::vector<Symbol> out;
  for (std::size_t s = 0; s < counts.size(); ++s) out.insert(out.end(), counts[s], static_cast<Symbol>(s));
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<Symbol> random_sequence(std::size_t length, std::size_t alphabet, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(alphabet);
  std::exponential_distribution<double> expo(1.0);
  const double skew = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
  for (auto& w : weights) w = std::pow(expo(rng) + 1e-3, skew);
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  std::vector<Symbol> out(length);
  for (auto& s : out) s = static_cast<Symbol>(pick(rng));
  return out;
}

long double entropy_oracle(const std::vector<std::uint64_t>& counts) {
  long double total = 0;
  for (auto c : counts) total += static_cast<long double>(c);
  long double h = 0;
  for (auto c : counts) {
    if (c == 0) continue;
    const long double p = static_cast<long double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<int> huffman_code_lengths(const std::vector<std::uint64_t>& counts) {
  struct Node {
    std::uint64_t weight;
    int left = -1;
    int right = -1;
  };
  std::vector<Node> nodes;
  using Item = std::pair<std::uint64_t, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<int> leaf_of(counts.size(), -1);
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0) continue;
    leaf_of[s] = static_cast<int>(nodes.size());
    nodes.push_back({counts[s]});
    heap.emplace(counts[s], leaf_of[s]);
  }
  std::vector<int> lengths(counts.size(), 0);
  if (heap.size() == 1) {
    for (std::size_t s = 0; s < counts.size(); ++s) {
      if (counts[s]) lengths[s] = 1;
    }
    return lengths;
  }
  while (heap.size() > 1) {
    const auto a = heap.top();
    heap.pop();
    const auto b = heap.top();
    heap.pop();
    nodes.push_back({a.first + b.first, a.second, b.second});
    heap.emplace(a.first + b.first, static_cast<int>(nodes.size() - 1));
  }
  std::vector<int> depth(nodes.size(), 0);
  for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; --i) {
    if (nodes[i].left >= 0) {
      depth[nodes[i].left] = depth[i] + 1;
      depth[nodes[i].right] = depth[i] + 1;
    }
  }
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (leaf_of[s] >= 0) lengths[s] = depth[leaf_of[s]];
  }
  return lengths;
}

std::uint64_t huffman_total_bits(const std::vector<std::uint64_t>& counts) {
  const auto lengths = huffman_code_lengths(counts);
  std::uint64_t bits = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) bits += counts[s] * static_cast<std::uint64_t>(lengths[s]);
  return bits;
}

std::vector<Symbol> quantize_no_zero_point(const std::vector<float>& weights, double scale) {
  const double edge = 2.0 * scale / 3.0;
  std::vector<Symbol> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    out[i] = w < -edge ? 0 : (w < 0.0 ? 1 : (w < edge ? 2 : 3));
  }
  return out;
}

std::vector<SyntheticLayer> synthetic_model(std::uint64_t seed) {
  const std::uint32_t channels[] = {8, 8, 16, 16, 24, 24, 32, 32};
  const std::uint32_t bins[] = {13, 11, 9, 7, 5, 9, 7, 5};
  std::vector<SyntheticLayer> out;
  for (int i = 0; i < 8; ++i) {
    out.push_back({gaussian_tensor("conv" + std::to_string(i), {1024, channels[i], 3, 3}, 0.05, seed + i), bins[i]});
  }
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("wans_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace wans::testing
