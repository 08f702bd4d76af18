#include "wans/stream_codec.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include "wans/error.hpp"

namespace wans {
namespace {

constexpr std::size_t kMaxRank = 128;

struct AxisGeometry {
  std::uint64_t outer = 1;
  std::uint64_t extent = 1;
  std::uint64_t inner = 1;
};

AxisGeometry geometry(std::span<const std::uint32_t> shape, std::uint32_t axis) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw Error(ErrorCode::kShapeMismatch, "rank " + std::to_string(shape.size()) + " not in [1, 128]");
  }
  if (axis >= shape.size()) {
    throw Error(ErrorCode::kShapeMismatch, "split axis " + std::to_string(axis) + " >= rank " +
                                               std::to_string(shape.size()));
  }
  AxisGeometry g;
  for (std::size_t d = 0; d < axis; ++d) g.outer *= shape[d];
  g.extent = shape[axis];
  for (std::size_t d = axis + 1; d < shape.size(); ++d) g.inner *= shape[d];
  return g;
}

[[noreturn]] void rethrow_for_stream(const Error& e, std::size_t stream) {
  throw Error(e.code(), "stream " + std::to_string(stream) + ": " + e.what());
}

std::vector<Symbol> decode_one(const LayerBundle& b, const DecodeTable& table, std::size_t i,
                               DecodeCounters* counters) {
  try {
    return decode(b.streams[i], table, b.streams[i].symbol_count, counters);
  } catch (const Error& e) {
    rethrow_for_stream(e, i);
  }
}

// Fig. 3 style: a vector of states advanced in rounds, one lookup per live
// stream per round, all sharing the same table.
std::vector<std::vector<Symbol>> decode_lockstep(const LayerBundle& b, const DecodeTable& table,
                                                 LayerDecodeStats& stats) {
  const std::uint32_t l = table.table_size();
  const std::size_t n = b.streams.size();
  std::vector<std::uint32_t> states(n);
  std::vector<BitReader> readers;
  readers.reserve(n);
  std::vector<std::vector<Symbol>> out(n);
  std::uint64_t rounds = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = b.streams[i];
    if (s.final_state < l || s.final_state >= 2 * l) {
      throw Error(ErrorCode::kCorruptStream, "stream " + std::to_string(i) + ": initial state out of range");
    }
    states[i] = s.final_state;
    readers.emplace_back(s.payload, s.bit_length);
    out[i].resize(s.symbol_count);
    rounds = std::max<std::uint64_t>(rounds, s.symbol_count);
  }
  for (std::uint64_t r = 0; r < rounds; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      if (r >= out[i].size()) continue;
      const DecodeEntry& e = table.at_state(states[i]);
      if (!readers[i].can_read(e.nb_bits)) {
        throw Error(ErrorCode::kCorruptStream,
                    "stream " + std::to_string(i) + ": bit underrun at symbol " + std::to_string(r));
      }
      out[i][r] = e.symbol;
      states[i] = l + e.new_x + readers[i].read(e.nb_bits);
      ++stats.steps_per_stream[i];
      ++stats.lookups;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    stats.bits_read += readers[i].position();
    if (readers[i].position() != readers[i].bit_length() || states[i] != l) {
      throw Error(ErrorCode::kCorruptStream,
                  "stream " + std::to_string(i) + ": did not end at the initial state with all bits consumed");
    }
  }
  return out;
}

std::vector<std::size_t> stream_order(std::size_t n, const DecodeOptions& opts) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (opts.schedule == DecodeSchedule::kReverse) {
    std::reverse(order.begin(), order.end());
  } else if (opts.schedule == DecodeSchedule::kShuffled) {
    std::mt19937_64 rng(opts.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

std::vector<Symbol> decode_raw(const LayerBundle& b) {
  const auto& s = b.streams.front();
  std::vector<Symbol> out(s.payload.begin(), s.payload.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] >= b.quantizer.bins) {
      throw Error(ErrorCode::kCorruptStream, "raw symbol " + std::to_string(out[i]) + " at index " +
                                                 std::to_string(i) + " exceeds the 8-bit quantizer");
    }
  }
  return out;
}

}  // namespace

std::uint64_t LayerBundle::symbol_count() const noexcept {
  std::uint64_t n = 0;
  for (const auto& s : streams) n += s.symbol_count;
  return n;
}

void LayerBundle::validate() const {
  const auto g = geometry(shape, split_axis);
  const std::uint64_t elements = element_count(shape);
  quantizer.validate();
  if (elements == 0 || streams.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "layer '" + name + "' has no elements or no streams");
  }
  if (symbol_count() != elements) {
    throw Error(ErrorCode::kShapeMismatch, "layer '" + name + "': streams hold " +
                                               std::to_string(symbol_count()) + " symbols, shape " +
                                               shape_to_string(shape) + " needs " + std::to_string(elements));
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].payload.size() != payload_bytes_for(streams[i].bit_length)) {
      throw Error(ErrorCode::kCorruptStream,
                  "layer '" + name + "' stream " + std::to_string(i) + ": payload length disagrees with bit length");
    }
  }
  if (!compressed) {
    if (histogram || quantizer.bins != kRawLayerBins || streams.size() != 1 ||
        streams.front().bit_length != 8 * elements) {
      throw Error(ErrorCode::kInvalidTable, "layer '" + name + "': malformed uncompressed layer");
    }
    return;
  }
  if (!histogram || histogram->alphabet_size() != quantizer.bins) {
    throw Error(ErrorCode::kInvalidTable, "layer '" + name + "': histogram does not match the bin count");
  }
  if (streams.size() != 1 && streams.size() != g.extent) {
    throw Error(ErrorCode::kShapeMismatch, "layer '" + name + "': " + std::to_string(streams.size()) +
                                               " streams for split extent " + std::to_string(g.extent));
  }
  if (streams.size() == g.extent && g.extent > 1) {
    for (std::size_t i = 0; i < streams.size(); ++i) {
      if (streams[i].symbol_count != g.outer * g.inner) {
        throw Error(ErrorCode::kShapeMismatch,
                    "layer '" + name + "' stream " + std::to_string(i) + ": wrong symbol count");
      }
    }
  }
  const std::uint32_t l = histogram->table_size();
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].final_state < l || streams[i].final_state >= 2 * l) {
      throw Error(ErrorCode::kCorruptStream,
                  "layer '" + name + "' stream " + std::to_string(i) + ": state outside [l, 2l)");
    }
  }
}

std::vector<std::vector<Symbol>> split_streams(std::span<const Symbol> symbols,
                                               std::span<const std::uint32_t> shape, std::uint32_t axis) {
  const auto g = geometry(shape, axis);
  if (element_count(shape) != symbols.size()) {
    throw Error(ErrorCode::kShapeMismatch, "shape " + shape_to_string(shape) + " holds " +
                                               std::to_string(element_count(shape)) + " elements, got " +
                                               std::to_string(symbols.size()));
  }
  std::vector<std::vector<Symbol>> streams(g.extent);
  for (auto& s : streams) s.reserve(g.outer * g.inner);
  for (std::uint64_t o = 0; o < g.outer; ++o) {
    for (std::uint64_t c = 0; c < g.extent; ++c) {
      const auto base = symbols.begin() + static_cast<std::ptrdiff_t>((o * g.extent + c) * g.inner);
      streams[c].insert(streams[c].end(), base, base + static_cast<std::ptrdiff_t>(g.inner));
    }
  }
  return streams;
}

std::vector<Symbol> merge_streams(const std::vector<std::vector<Symbol>>& streams,
                                  std::span<const std::uint32_t> shape, std::uint32_t axis) {
  const auto g = geometry(shape, axis);
  if (streams.size() != g.extent) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(streams.size()) + " streams for split extent " + std::to_string(g.extent));
  }
  for (const auto& s : streams) {
    if (s.size() != g.outer * g.inner) {
      throw Error(ErrorCode::kShapeMismatch, "stream length " + std::to_string(s.size()) + ", expected " +
                                                 std::to_string(g.outer * g.inner));
    }
  }
  std::vector<Symbol> out;
  out.reserve(element_count(shape));
  for (std::uint64_t o = 0; o < g.outer; ++o) {
    for (std::uint64_t c = 0; c < g.extent; ++c) {
      const auto base = streams[c].begin() + static_cast<std::ptrdiff_t>(o * g.inner);
      out.insert(out.end(), base, base + static_cast<std::ptrdiff_t>(g.inner));
    }
  }
  return out;
}

LayerBundle encode_symbols(std::span<const Symbol> symbols, const Shape& shape, const QuantizerSpec& spec,
                           const LayerCodecOptions& opts) {
  spec.validate();
  if (symbols.empty()) throw Error(ErrorCode::kEmptyInput, "layer '" + spec.layer_id + "' is empty");
  geometry(shape, opts.split_axis);

  LayerBundle b;
  b.name = spec.layer_id;
  b.shape = shape;
  b.split_axis = opts.split_axis;
  b.quantizer = spec;
  b.compressed = true;

  const auto dist = histogram(symbols, spec.bins);
  b.histogram = normalize_freqs(dist, opts.table_size);
  const EncodeTable table(*b.histogram);

  if (opts.parallel) {
    for (const auto& s : split_streams(symbols, shape, opts.split_axis)) b.streams.push_back(encode(s, table));
  } else {
    if (element_count(shape) != symbols.size()) {
      throw Error(ErrorCode::kShapeMismatch, "shape " + shape_to_string(shape) + " does not match " +
                                                 std::to_string(symbols.size()) + " symbols");
    }
    b.streams.push_back(encode(symbols, table));
  }
  return b;
}

LayerBundle encode_layer(const Tensor& weights, const QuantizerSpec& spec, const LayerCodecOptions& opts) {
  if (weights.values.empty()) throw Error(ErrorCode::kEmptyInput, "layer '" + weights.name + "' is empty");
  QuantizerSpec named = spec;
  if (named.layer_id.empty()) named.layer_id = weights.name;
  const auto symbols = quantize(weights.values, named);
  return encode_symbols(symbols, weights.shape, named, opts);
}

LayerBundle encode_raw_layer(const Tensor& weights) {
  if (weights.values.empty()) throw Error(ErrorCode::kEmptyInput, "layer '" + weights.name + "' is empty");
  if (element_count(weights.shape) != weights.values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "layer '" + weights.name + "': shape does not match value count");
  }
  geometry(weights.shape, 0);
  LayerBundle b;
  b.name = weights.name;
  b.shape = weights.shape;
  b.split_axis = 0;
  b.quantizer = make_quantizer(weights.values, kRawLayerBins, ScalePolicy::max_abs(), weights.name);
  b.compressed = false;
  EncodedStream raw;
  raw.payload = quantize(weights.values, b.quantizer);
  raw.symbol_count = static_cast<std::uint32_t>(raw.payload.size());
  raw.bit_length = static_cast<std::uint32_t>(8 * raw.payload.size());
  b.streams.push_back(std::move(raw));
  return b;
}

std::vector<Symbol> decode_layer(const LayerBundle& bundle, const DecodeOptions& opts, LayerDecodeStats* stats) {
  bundle.validate();
  LayerDecodeStats local;
  local.steps_per_stream.assign(bundle.streams.size(), 0);
  for (std::size_t i = 0; i < bundle.streams.size(); ++i) {
    local.makespan = std::max<std::uint64_t>(local.makespan, bundle.streams[i].symbol_count);
  }
  if (!bundle.compressed) {
    auto out = decode_raw(bundle);
    if (stats) *stats = std::move(local);
    return out;
  }

  const DecodeTable table(*bundle.histogram);
  const std::size_t n = bundle.streams.size();
  std::vector<std::vector<Symbol>> decoded(n);
  std::vector<DecodeCounters> counters(n);

  switch (opts.schedule) {
    case DecodeSchedule::kLockstep:
      decoded = decode_lockstep(bundle, table, local);
      break;
    case DecodeSchedule::kConcurrent: {
      unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
      workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
      std::vector<std::exception_ptr> failures(workers);
      {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&, w] {
            try {
              for (std::size_t i = w; i < n; i += workers) decoded[i] = decode_one(bundle, table, i, &counters[i]);
            } catch (...) {
              failures[w] = std::current_exception();
            }
          });
        }
      }
      for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
      }
      break;
    }
    default:
      for (std::size_t i : stream_order(n, opts)) decoded[i] = decode_one(bundle, table, i, &counters[i]);
      break;
  }

  if (opts.schedule != DecodeSchedule::kLockstep) {
    for (std::size_t i = 0; i < n; ++i) {
      local.steps_per_stream[i] = counters[i].lookups;
      local.lookups += counters[i].lookups;
      local.bits_read += counters[i].bits_consumed;
    }
  }
  if (stats) *stats = std::move(local);
  if (n == 1) return std::move(decoded.front());
  return merge_streams(decoded, bundle.shape, bundle.split_axis);
}

BundleSizeReport bundle_size_report(const LayerBundle& bundle) {
  BundleSizeReport r;
  r.metadata_bytes = 2 + bundle.name.size()          // name
                     + 1 + 4 * bundle.shape.size()   // rank + dims
                     + 1                             // flags
                     + 2 + 8;                        // bins + scale
  r.table_bytes = 2 + (bundle.histogram ? 2 * bundle.histogram->alphabet_size() : 0);
  r.stream_count = bundle.streams.size();
  r.stream_header_bytes = kStreamCountBytes + kStreamHeaderBytes * bundle.streams.size();
  for (const auto& s : bundle.streams) {
    r.payload_bytes += payload_bytes_for(s.bit_length);
    r.payload_bits += s.bit_length;
  }
  r.total_bytes = r.metadata_bytes + r.table_bytes + r.stream_header_bytes + r.payload_bytes;
  return r;
}

double parallel_overhead(std::size_t single_total_bytes, std::size_t parallel_total_bytes) {
  if (single_total_bytes == 0) throw Error(ErrorCode::kInvalidArgument, "single-stream size is zero");
  return (static_cast<double>(parallel_total_bytes) - static_cast<double>(single_total_bytes)) /
         static_cast<double>(single_total_bytes);
}

}  // namespace wans
