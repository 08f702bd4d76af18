#include "wans/tans.hpp"

#include <bit>
#include <string>

#include "wans/error.hpp"

namespace wans {
namespace {

std::uint32_t floor_log2(std::uint32_t v) noexcept {
  return static_cast<std::uint32_t>(std::bit_width(v)) - 1u;
}

// Collects emitted bit groups and lays them out LSB-first.
class BitWriter {
 public:
  void write(std::uint32_t value, std::uint32_t n) {
    for (std::uint32_t i = 0; i < n; ++i) {
      if ((bit_length_ & 7) == 0) bytes_.push_back(0);
      if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(1u << (bit_length_ & 7));
      ++bit_length_;
    }
  }

  std::uint64_t bit_length() const noexcept { return bit_length_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bit_length_ = 0;
};

}  // namespace

bool is_valid_table_size(std::uint64_t l) noexcept {
  return l >= kMinTableSize && l <= kMaxTableSize && std::has_single_bit(l);
}

NormalizedHistogram::NormalizedHistogram(std::uint32_t table_size, std::vector<std::uint32_t> freqs)
    : table_size_(table_size), table_log_(0), freqs_(std::move(freqs)) {
  if (!is_valid_table_size(table_size_)) {
    throw Error(ErrorCode::kInvalidTableSize,
                "table size " + std::to_string(table_size_) + " is not a power of two in [2, 4096]");
  }
  table_log_ = floor_log2(table_size_);
  if (freqs_.empty() || freqs_.size() > kMaxAlphabet) {
    throw Error(ErrorCode::kInvalidTable, "alphabet size " + std::to_string(freqs_.size()));
  }
  std::uint64_t sum = 0;
  for (auto f : freqs_) sum += f;
  if (sum != table_size_) {
    throw Error(ErrorCode::kInvalidTable, "frequencies sum to " + std::to_string(sum) +
                                              ", expected " + std::to_string(table_size_));
  }
}

NormalizedHistogram normalize_freqs(const Distribution& dist, std::uint32_t table_size) {
  if (!is_valid_table_size(table_size)) {
    throw Error(ErrorCode::kInvalidTableSize,
                "table size " + std::to_string(table_size) + " is not a power of two in [2, 4096]");
  }
  if (dist.total() == 0) throw Error(ErrorCode::kEmptyInput, "cannot normalize an empty histogram");
  const std::size_t present = dist.present_symbols();
  if (present > table_size) {
    throw Error(ErrorCode::kTableTooSmall, std::to_string(present) + " symbols present but only " +
                                               std::to_string(table_size) + " states");
  }

  using Wide = __int128;
  const auto& counts = dist.counts();
  const Wide total = dist.total();
  const std::size_t n = counts.size();
  std::vector<std::uint32_t> freqs(n, 0);
  // deficit[s] * total = count * l - freq * total, i.e. exact share minus assigned.
  auto deficit = [&](std::size_t s) { return Wide(counts[s]) * table_size - Wide(freqs[s]) * total; };

  std::uint64_t sum = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (counts[s] == 0) continue;
    const auto share = static_cast<std::uint32_t>(Wide(counts[s]) * table_size / total);
    freqs[s] = std::max<std::uint32_t>(1, share);
    sum += freqs[s];
  }
  while (sum < table_size) {
    std::size_t best = n;
    for (std::size_t s = 0; s < n; ++s) {
      if (counts[s] == 0) continue;
      if (best == n || deficit(s) > deficit(best)) best = s;
    }
    ++freqs[best];
    ++sum;
  }
  while (sum > table_size) {
    std::size_t best = n;
    for (std::size_t s = 0; s < n; ++s) {
      if (freqs[s] <= 1) continue;
      if (best == n || deficit(s) < deficit(best)) best = s;
    }
    --freqs[best];
    --sum;
  }
  return NormalizedHistogram(table_size, std::move(freqs));
}

std::vector<Symbol> spread_symbols(const NormalizedHistogram& h) {
  const std::uint32_t l = h.table_size();
  const std::uint32_t mask = l - 1;
  // An odd stride is coprime with l, so the walk visits every slot once.
  // (5l/8 + 3 is even only for l = 8.)
  const std::uint32_t step = ((l >> 1) + (l >> 3) + 3) | 1u;
  std::vector<Symbol> spread(l);
  std::uint32_t pos = 0;
  for (std::size_t s = 0; s < h.alphabet_size(); ++s) {
    for (std::uint32_t i = 0; i < h.freqs()[s]; ++i) {
      spread[pos] = static_cast<Symbol>(s);
      pos = (pos + step) & mask;
    }
  }
  return spread;
}

DecodeTable::DecodeTable(const NormalizedHistogram& h)
    : table_size_(h.table_size()), table_log_(h.table_log()), alphabet_size_(h.alphabet_size()) {
  const auto spread = spread_symbols(h);
  std::vector<std::uint32_t> next(h.freqs().begin(), h.freqs().end());
  entries_.resize(table_size_);
  for (std::uint32_t i = 0; i < table_size_; ++i) {
    const Symbol s = spread[i];
    const std::uint32_t reduced = next[s]++;  // in [freq, 2 freq)
    const std::uint32_t nb = table_log_ - floor_log2(reduced);
    entries_[i] = DecodeEntry{s, static_cast<std::uint8_t>(nb),
                              static_cast<std::uint16_t>((reduced << nb) - table_size_)};
  }
}

EncodeTable::EncodeTable(const NormalizedHistogram& h) : table_size_(h.table_size()) {
  const std::uint32_t table_log = h.table_log();
  symbols_.resize(h.alphabet_size());
  std::uint32_t cumulative = 0;
  for (std::size_t s = 0; s < h.alphabet_size(); ++s) {
    auto& e = symbols_[s];
    e.freq = h.freqs()[s];
    e.first = cumulative;
    cumulative += e.freq;
    if (e.freq == 0) continue;
    e.max_bits = table_log - floor_log2(e.freq);
    e.threshold = e.freq << e.max_bits;
  }

  // The k-th slot of symbol s in spread order is the state reached from the
  // reduced state freq[s] + k; this mirrors the decoder's assignment.
  next_states_.resize(table_size_);
  const auto spread = spread_symbols(h);
  std::vector<std::uint32_t> seen(h.alphabet_size(), 0);
  for (std::uint32_t i = 0; i < table_size_; ++i) {
    const Symbol s = spread[i];
    next_states_[symbols_[s].first + seen[s]++] = table_size_ + i;
  }
}

TansTables build_tables(const NormalizedHistogram& h) { return TansTables{EncodeTable(h), DecodeTable(h)}; }

EncodedStream encode(std::span<const Symbol> symbols, const EncodeTable& table) {
  if (symbols.size() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "stream longer than 2^32 - 1 symbols");
  }
  struct Chunk {
    std::uint32_t value;
    std::uint32_t nb_bits;
  };
  std::vector<Chunk> chunks(symbols.size());
  std::uint32_t x = table.table_size();

  // ANS is LIFO: encode back to front so the decoder emits symbols in order.
  for (std::size_t i = symbols.size(); i-- > 0;) {
    const Symbol s = symbols[i];
    if (!table.encodable(s)) {
      throw Error(ErrorCode::kUnencodableSymbol,
                  "symbol " + std::to_string(s) + " at index " + std::to_string(i) + " has no table slot");
    }
    const auto t = table.transition(s, x);
    chunks[i] = Chunk{x & ((1u << t.nb_bits) - 1u), t.nb_bits};
    x = t.next_state;
  }

  BitWriter writer;
  for (const auto& c : chunks) writer.write(c.value, c.nb_bits);
  if (writer.bit_length() > UINT32_MAX) {
    throw Error(ErrorCode::kInvalidArgument, "payload exceeds 2^32 - 1 bits");
  }

  EncodedStream out;
  out.bit_length = static_cast<std::uint32_t>(writer.bit_length());
  out.payload = writer.take();
  out.final_state = x;
  out.symbol_count = static_cast<std::uint32_t>(symbols.size());
  return out;
}

std::vector<Symbol> decode(const EncodedStream& stream, const DecodeTable& table, std::uint32_t count,
                           DecodeCounters* counters) {
  const std::uint32_t l = table.table_size();
  if (count != stream.symbol_count) {
    throw Error(ErrorCode::kCorruptStream, "requested " + std::to_string(count) +
                                               " symbols from a stream of " +
                                               std::to_string(stream.symbol_count));
  }
  if (stream.final_state < l || stream.final_state >= 2 * l) {
    throw Error(ErrorCode::kCorruptStream,
                "initial state " + std::to_string(stream.final_state) + " outside [l, 2l)");
  }
  if (payload_bytes_for(stream.bit_length) > stream.payload.size()) {
    throw Error(ErrorCode::kCorruptStream, "payload shorter than its declared bit length");
  }

  BitReader reader(stream.payload, stream.bit_length);
  std::vector<Symbol> out(count);
  std::uint32_t x = stream.final_state;
  DecodeCounters local;
  for (std::uint32_t i = 0; i < count; ++i) {
    const DecodeEntry& e = table.at_state(x);
    ++local.lookups;
    if (!reader.can_read(e.nb_bits)) {
      throw Error(ErrorCode::kCorruptStream, "bit underrun at symbol " + std::to_string(i));
    }
    ++local.bit_reads;
    if (e.nb_bits == 0) ++local.zero_bit_steps;
    out[i] = e.symbol;
    x = l + e.new_x + reader.read(e.nb_bits);
  }
  local.bits_consumed = reader.position();
  if (counters) *counters = local;
  if (reader.position() != stream.bit_length) {
    throw Error(ErrorCode::kCorruptStream, std::to_string(stream.bit_length - reader.position()) +
                                               " payload bits left after the last symbol");
  }
  if (x != l) {
    throw Error(ErrorCode::kCorruptStream,
                "terminal state " + std::to_string(x) + " != initial encoder state " + std::to_string(l));
  }
  return out;
}

std::size_t lut_footprint(const DecodeTable& table) noexcept { return 3u * table.table_size(); }

std::uint32_t state_width_bits(const DecodeTable& table) noexcept { return table.table_log() + 1; }

double measured_rate(const EncodedStream& stream) {
  if (stream.symbol_count == 0) throw Error(ErrorCode::kEmptyInput, "rate of an empty stream");
  return static_cast<double>(stream.bit_length) / static_cast<double>(stream.symbol_count);
}

}  // namespace wans
