#include "wans/error.hpp"

namespace wans {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kUndefinedEntropy: return "undefined entropy";
    case ErrorCode::kZeroProbability: return "zero probability";
    case ErrorCode::kInvalidBins: return "invalid bins";
    case ErrorCode::kDegenerateScale: return "degenerate scale";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kTableTooSmall: return "table too small";
    case ErrorCode::kInvalidTableSize: return "invalid table size";
    case ErrorCode::kUnencodableSymbol: return "unencodable symbol";
    case ErrorCode::kCorruptStream: return "corrupt stream";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kMissingEntry: return "missing entropy table entry";
    case ErrorCode::kInfeasibleTarget: return "infeasible target";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kTruncated: return "truncated archive";
    case ErrorCode::kInvalidTable: return "invalid table";
    case ErrorCode::kTrailingData: return "trailing data";
    case ErrorCode::kMalformedLayer: return "malformed layer";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kLengthMismatch: return "length mismatch";
    case ErrorCode::kMalformedManifest: return "malformed manifest";
    case ErrorCode::kDuplicateName: return "duplicate layer name";
  }
  return "unknown error";
}

bool Error::is_corrupt_data() const noexcept {
  switch (code_) {
    case ErrorCode::kCorruptStream:
    case ErrorCode::kBadMagic:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kTruncated:
    case ErrorCode::kInvalidTable:
    case ErrorCode::kTrailingData:
    case ErrorCode::kMalformedLayer:
      return true;
    default:
      return false;
  }
}

}  // namespace wans
