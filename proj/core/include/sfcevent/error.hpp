#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfcevent {

enum class ErrorCode {
  // media-io
  MagicMismatch,
  TruncatedPayload,
  InvalidHeader,
  InvalidPayload,
  IoFailure,
  MissingIndex,
  UnsupportedPgm,
  ParseError,
  // geometry / preconditions
  InvalidParameter,
  PreconditionFailed,
  GeometryMismatch,
  GeometryError,
  DegenerateCell,
  // streams
  UnorderedInput,
  CoordOverflow,
  CodeOverflow,
  // evaluation
  UnknownScenario,
  InvalidTiming,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Every module reports failures
/// through this type so the CLI can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace sfcevent
