#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wans/quantizer.hpp"
#include "wans/tans.hpp"
#include "wans/tensor.hpp"

namespace wans {

// Compressed form of one layer: a shared normalized histogram (the decode
// table is rebuilt from it) and one or more independently decodable streams.
// Uncompressed layers keep their 8-bit symbols verbatim in a single stream
// with no histogram.
struct LayerBundle {
  std::string name;
  Shape shape;
  std::uint32_t split_axis = 0;
  QuantizerSpec quantizer;
  bool compressed = true;
  std::optional<NormalizedHistogram> histogram;
  std::vector<EncodedStream> streams;

  std::uint64_t symbol_count() const noexcept;

  // Throws kCorruptStream / kShapeMismatch / kInvalidTable on violations.
  void validate() const;

  friend bool operator==(const LayerBundle&, const LayerBundle&) = default;
};

// Row-major partition of a tensor by its index along `axis`.
std::vector<std::vector<Symbol>> split_streams(std::span<const Symbol> symbols,
                                               std::span<const std::uint32_t> shape, std::uint32_t axis);

// Inverse of split_streams.
std::vector<Symbol> merge_streams(const std::vector<std::vector<Symbol>>& streams,
                                  std::span<const std::uint32_t> shape, std::uint32_t axis);

struct LayerCodecOptions {
  std::uint32_t table_size = 256;
  // Input-channel dimension of an [out, in, kh, kw] weight tensor.
  std::uint32_t split_axis = 1;
  bool parallel = true;
};

LayerBundle encode_layer(const Tensor& weights, const QuantizerSpec& spec, const LayerCodecOptions& opts = {});

LayerBundle encode_symbols(std::span<const Symbol> symbols, const Shape& shape, const QuantizerSpec& spec,
                           const LayerCodecOptions& opts = {});

// 8-bit path for layers that stay uncompressed: 255-bin zero-point quantizer
// at max-abs scale, symbols stored as raw bytes.
LayerBundle encode_raw_layer(const Tensor& weights);

enum class DecodeSchedule {
  kSequential,  // stream 0, 1, 2, ...
  kReverse,     // last stream first
  kShuffled,    // random stream order from a seed
  kConcurrent,  // streams split over worker threads
  kLockstep,    // one state per stream, all advanced one symbol per round
};

struct LayerDecodeStats {
  std::vector<std::uint64_t> steps_per_stream;
  std::uint64_t lookups = 0;
  std::uint64_t bits_read = 0;
  // Rounds of a lockstep decoder: the longest stream.
  std::uint64_t makespan = 0;
};

struct DecodeOptions {
  DecodeSchedule schedule = DecodeSchedule::kSequential;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // kConcurrent; 0 picks hardware_concurrency
};

// Corrupt-stream errors name the failing stream index.
std::vector<Symbol> decode_layer(const LayerBundle& bundle, const DecodeOptions& opts = {},
                                 LayerDecodeStats* stats = nullptr);

// On-disk layout constants shared with the archive writer.
inline constexpr std::size_t kStreamHeaderBytes = 2 + 4 + 4;
inline constexpr std::size_t kStreamCountBytes = 4;

struct BundleSizeReport {
  std::size_t metadata_bytes = 0;       // name, shape, flags, quantizer
  std::size_t table_bytes = 0;          // table size field + normalized freqs
  std::size_t stream_header_bytes = 0;  // stream count + per-stream headers
  std::size_t payload_bytes = 0;
  std::uint64_t payload_bits = 0;
  std::size_t stream_count = 0;
  std::size_t total_bytes = 0;

  // Per-stream fixed cost bound: header plus at most one padding byte.
  static constexpr std::size_t kPerStreamFixedCost = kStreamHeaderBytes + 1;
};

BundleSizeReport bundle_size_report(const LayerBundle& bundle);

// (parallel - single) / single over serialized totals.
double parallel_overhead(std::size_t single_total_bytes, std::size_t parallel_total_bytes);

}  // namespace wans
