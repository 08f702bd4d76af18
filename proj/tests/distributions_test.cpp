#include "wans/distributions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/fixtures.hpp"
#include "wans/error.hpp"

namespace wans {
namespace {

// Reference values evaluated with 40-digit mpmath.
constexpr double kEntropy91 = 0.46899559358928122125;
constexpr double kBound55At16 = 0.011271055006945026620;
constexpr double kBound91At256 = 0.00041581583141941287444;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

TEST(Histogram, CountsOccurrences) {
  const std::vector<Symbol> symbols{0, 1, 0, 0};
  const auto d = histogram(symbols, 2);
  EXPECT_EQ(d.counts(), (std::vector<std::uint64_t>{3, 1}));
  EXPECT_EQ(d.total(), 4u);
  EXPECT_DOUBLE_EQ(d.prob(0), 0.75);
  EXPECT_DOUBLE_EQ(d.prob(1), 0.25);
}

TEST(Histogram, EmptyInput) {
  const auto d = histogram({}, 4);
  EXPECT_EQ(d.counts(), (std::vector<std::uint64_t>(4, 0)));
  EXPECT_EQ(d.total(), 0u);
}

TEST(Histogram, OutOfRangeNamesTheIndex) {
  const std::vector<Symbol> symbols{0, 1, 2};
  try {
    histogram(symbols, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
    EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
  }
  EXPECT_EQ(code_of([] { histogram(std::vector<Symbol>{2}, 2); }), ErrorCode::kOutOfRange);
}

TEST(Histogram, AlphabetBounds) {
  EXPECT_EQ(code_of([] { histogram({}, 0); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([] { histogram({}, 257); }), ErrorCode::kOutOfRange);
  EXPECT_NO_THROW(histogram({}, 256));
}

TEST(Entropy, KnownValues) {
  EXPECT_DOUBLE_EQ(shannon_entropy(Distribution::uniform(4)), 2.0);
  EXPECT_EQ(shannon_entropy(Distribution(3, {0, 7, 0})), 0.0);
  EXPECT_NEAR(shannon_entropy(Distribution(2, {9, 1})), kEntropy91, 1e-12);
}

TEST(Entropy, EmptyDistributionIsAnError) {
  EXPECT_EQ(code_of([] { shannon_entropy(Distribution(2, {0, 0})); }), ErrorCode::kUndefinedEntropy);
}

TEST(Entropy, BoundedByLogAlphabetAndMaximalOnlyWhenUniform) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 256)(rng);
    std::vector<std::uint64_t> counts(n);
    for (auto& c : counts) c = std::uniform_int_distribution<std::uint64_t>(0, 1000)(rng);
    counts[0] += 1;
    const Distribution d(n, counts);
    const double h = shannon_entropy(d);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(n)) + 1e-12);
    EXPECT_NEAR(h, static_cast<double>(testing::entropy_oracle(counts)), 1e-10);
    const bool uniform = std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == counts[0]; });
    if (!uniform) EXPECT_LT(h, std::log2(static_cast<double>(n)));
  }
  EXPECT_NEAR(shannon_entropy(Distribution::uniform(256, 5)), 8.0, 1e-12);
}

TEST(Entropy, ScalingCountsLeavesProbabilitiesUnchanged) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> counts(17);
    for (auto& c : counts) c = std::uniform_int_distribution<std::uint64_t>(0, 100)(rng);
    counts[3] += 1;
    const auto factor = std::uniform_int_distribution<std::uint64_t>(2, 1000)(rng);
    auto scaled = counts;
    for (auto& c : scaled) c *= factor;
    EXPECT_EQ(Distribution(17, counts).probs(), Distribution(17, scaled).probs());
  }
}

TEST(EntropyBound, Bytes) {
  EXPECT_DOUBLE_EQ(entropy_bound_bytes(Distribution::uniform(4), 4'000'000), 1e6);
  EXPECT_DOUBLE_EQ(entropy_bound_bytes(Distribution::uniform(4), 4'000'000) / kBytesPerMegabyte, 1.0);
  EXPECT_EQ(entropy_bound_bytes(Distribution(1, {3}), 123456), 0.0);
  EXPECT_NEAR(entropy_bound_bytes(Distribution(2, {9, 1}), 1'000'000), 58624.0, 0.5);
  EXPECT_NEAR(entropy_bound_bytes(Distribution(2, {9, 1}), 1'000'000), 58624.449198660, 1e-6);
}

TEST(DeltaHBound, HandEvaluatedValues) {
  EXPECT_NEAR(delta_h_bound(Distribution(2, {1, 1}), 16), kBound55At16, 1e-15);
  EXPECT_NEAR(delta_h_bound(Distribution(2, {1, 1}), 16), 4.0 / (256.0 * std::log(4.0)), 1e-15);
  EXPECT_NEAR(delta_h_bound(Distribution(2, {9, 1}), 256), kBound91At256, 1e-16);
  EXPECT_LT(delta_h_bound(Distribution(2, {1, 1}), 256), delta_h_bound(Distribution(2, {1, 1}), 64));
}

TEST(DeltaHBound, QuartersWhenTableDoubles) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 64)(rng);
    std::vector<std::uint64_t> counts(n);
    for (auto& c : counts) c = std::uniform_int_distribution<std::uint64_t>(1, 500)(rng);
    const Distribution d(n, counts);
    for (std::size_t l = 64; l <= 2048; l *= 2) {
      EXPECT_EQ(delta_h_bound(d, 2 * l), delta_h_bound(d, l) / 4.0);
    }
  }
}

TEST(DeltaHBound, Errors) {
  EXPECT_EQ(code_of([] { delta_h_bound(Distribution(3, {1, 0, 1}), 64); }), ErrorCode::kZeroProbability);
  EXPECT_EQ(code_of([] { delta_h_bound(Distribution::uniform(8), 4); }), ErrorCode::kTableTooSmall);
  // Dropping zero-probability symbols first makes the bound finite.
  EXPECT_GT(delta_h_bound(Distribution(3, {1, 0, 1}).without_zeros(), 64), 0.0);
}

}  // namespace
}  // namespace wans
