#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wans {

enum class ErrorCode {
  kOutOfRange,
  kUndefinedEntropy,
  kZeroProbability,
  kInvalidBins,
  kDegenerateScale,
  kEmptyInput,
  kTableTooSmall,
  kInvalidTableSize,
  kUnencodableSymbol,
  kCorruptStream,
  kShapeMismatch,
  kMissingEntry,
  kInfeasibleTarget,
  kInvalidArgument,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kInvalidTable,
  kTrailingData,
  kMalformedLayer,
  kIo,
  kLengthMismatch,
  kMalformedManifest,
  kDuplicateName,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries a code so callers (and the CLI
// exit-code mapping) can tell input problems from corrupt data.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // True for errors caused by malformed encoded data rather than bad input.
  bool is_corrupt_data() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace wans
