#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wans/distributions.hpp"

namespace wans {

inline constexpr std::uint32_t kMinTableSize = 2;
inline constexpr std::uint32_t kMaxTableSize = 4096;

bool is_valid_table_size(std::uint64_t l) noexcept;

// Integer frequencies summing to the table size l. A zero entry marks a symbol
// that never occurs and has no slot in the automaton.
class NormalizedHistogram {
 public:
  // Throws kInvalidTableSize / kInvalidTable when the invariants do not hold.
  NormalizedHistogram(std::uint32_t table_size, std::vector<std::uint32_t> freqs);

  std::uint32_t table_size() const noexcept { return table_size_; }
  std::uint32_t table_log() const noexcept { return table_log_; }
  std::size_t alphabet_size() const noexcept { return freqs_.size(); }
  const std::vector<std::uint32_t>& freqs() const noexcept { return freqs_; }

  friend bool operator==(const NormalizedHistogram&, const NormalizedHistogram&) = default;

 private:
  std::uint32_t table_size_;
  std::uint32_t table_log_;
  std::vector<std::uint32_t> freqs_;
};

// Largest-remainder apportionment of the counts onto l slots; every present
// symbol keeps at least one slot. Throws kTableTooSmall when the present
// symbols outnumber l.
NormalizedHistogram normalize_freqs(const Distribution& dist, std::uint32_t table_size);

// Slot -> symbol permutation: walk the table with stride 5l/8 + 3 (forced odd)
// placing each symbol's freqs[s] slots in symbol order.
std::vector<Symbol> spread_symbols(const NormalizedHistogram& h);

struct DecodeEntry {
  Symbol symbol;
  std::uint8_t nb_bits;
  // Offset of the next state base from l: next state = l + new_x + bits read.
  std::uint16_t new_x;
};

class DecodeTable {
 public:
  explicit DecodeTable(const NormalizedHistogram& h);

  std::uint32_t table_size() const noexcept { return table_size_; }
  std::uint32_t table_log() const noexcept { return table_log_; }
  std::size_t alphabet_size() const noexcept { return alphabet_size_; }
  const std::vector<DecodeEntry>& entries() const noexcept { return entries_; }

  // Entry for a working-range state x in [l, 2l).
  const DecodeEntry& at_state(std::uint32_t x) const noexcept { return entries_[x - table_size_]; }

 private:
  std::uint32_t table_size_;
  std::uint32_t table_log_;
  std::size_t alphabet_size_;
  std::vector<DecodeEntry> entries_;
};

class EncodeTable {
 public:
  explicit EncodeTable(const NormalizedHistogram& h);

  std::uint32_t table_size() const noexcept { return table_size_; }
  std::size_t alphabet_size() const noexcept { return symbols_.size(); }
  bool encodable(Symbol s) const noexcept { return s < symbols_.size() && symbols_[s].freq > 0; }

  struct Transition {
    std::uint32_t nb_bits;
    std::uint32_t next_state;
  };

  // From state x in [l, 2l): emit the low nb_bits of x, move to next_state.
  Transition transition(Symbol s, std::uint32_t x) const noexcept {
    const auto& e = symbols_[s];
    const std::uint32_t nb = e.max_bits - (x < e.threshold ? 1u : 0u);
    const std::uint32_t reduced = x >> nb;
    return {nb, next_states_[e.first + reduced - e.freq]};
  }

 private:
  struct SymbolEntry {
    std::uint32_t freq = 0;
    std::uint32_t first = 0;      // offset into next_states_
    std::uint32_t max_bits = 0;   // table_log - floor(log2 freq)
    std::uint32_t threshold = 0;  // freq << max_bits
  };

  std::uint32_t table_size_;
  std::vector<SymbolEntry> symbols_;
  std::vector<std::uint32_t> next_states_;
};

struct TansTables {
  EncodeTable encode;
  DecodeTable decode;
};

TansTables build_tables(const NormalizedHistogram& h);

// Payload bits are packed least-significant-bit first inside each byte and
// read front to back by the decoder.
struct EncodedStream {
  std::vector<std::uint8_t> payload;
  std::uint32_t bit_length = 0;
  std::uint32_t final_state = 0;
  std::uint32_t symbol_count = 0;

  friend bool operator==(const EncodedStream&, const EncodedStream&) = default;
};

inline std::size_t payload_bytes_for(std::uint64_t bit_length) noexcept {
  return static_cast<std::size_t>((bit_length + 7) / 8);
}

EncodedStream encode(std::span<const Symbol> symbols, const EncodeTable& table);

struct DecodeCounters {
  std::uint64_t lookups = 0;
  std::uint64_t bit_reads = 0;
  std::uint64_t bits_consumed = 0;
  std::uint64_t zero_bit_steps = 0;
};

// Throws kCorruptStream on bit underrun, leftover bits or a terminal state
// other than the encoder's initial state l.
std::vector<Symbol> decode(const EncodedStream& stream, const DecodeTable& table, std::uint32_t count,
                           DecodeCounters* counters = nullptr);

// Hardware LUT cost: one byte each of symbol, nb_bits and new_x per state.
std::size_t lut_footprint(const DecodeTable& table) noexcept;

// Width of the state adder, log2(l) + 1.
std::uint32_t state_width_bits(const DecodeTable& table) noexcept;

double measured_rate(const EncodedStream& stream);

// LSB-first bit cursor over a payload; shared by the single and multi-stream
// decoders.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_length) noexcept
      : bytes_(bytes), bit_length_(bit_length) {}

  bool can_read(std::uint32_t n) const noexcept { return pos_ + n <= bit_length_; }

  // Caller guarantees can_read(n) and n <= 16.
  std::uint32_t read(std::uint32_t n) noexcept {
    std::uint32_t value = 0;
    std::uint32_t got = 0;
    while (got < n) {
      const std::uint64_t byte = pos_ >> 3;
      const std::uint32_t offset = static_cast<std::uint32_t>(pos_ & 7);
      const std::uint32_t take = std::min<std::uint32_t>(8 - offset, n - got);
      const std::uint32_t bits = (bytes_[byte] >> offset) & ((1u << take) - 1u);
      value |= bits << got;
      got += take;
      pos_ += take;
    }
    return value;
  }

  std::uint64_t position() const noexcept { return pos_; }
  std::uint64_t bit_length() const noexcept { return bit_length_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t bit_length_;
  std::uint64_t pos_ = 0;
};

}  // namespace wans
