#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmo {

enum class ErrorCode {
  kZeroVector,
  kDimensionMismatch,
  kEmptyText,
  kInvalidHeader,
  kInvalidConfig,
  kEmptyInteraction,
  kEmptyQuery,
  kUnknownRecord,
  kUnknownSession,
  kPortFailure,
  kPortUnavailable,
  kRemoteParseFailure,
  kIdOrderViolation,
  kIoFailure,
  kConfigMismatch,
  kCorruptLine,
  kCorpusParseError,
  kUnknownParam,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hmo
