#include "sfcevent/error.hpp"

#include <fmt/format.h>

namespace sfcevent {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::InvalidHeader: return "InvalidHeader";
    case ErrorCode::InvalidPayload: return "InvalidPayload";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MissingIndex: return "MissingIndex";
    case ErrorCode::UnsupportedPgm: return "UnsupportedPgm";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::GeometryError: return "GeometryError";
    case ErrorCode::DegenerateCell: return "DegenerateCell";
    case ErrorCode::UnorderedInput: return "UnorderedInput";
    case ErrorCode::CoordOverflow: return "CoordOverflow";
    case ErrorCode::CodeOverflow: return "CodeOverflow";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::InvalidTiming: return "InvalidTiming";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code), message_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace sfcevent
