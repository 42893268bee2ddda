#include "hmo/error.hpp"

namespace hmo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kInvalidHeader: return "InvalidHeader";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kEmptyInteraction: return "EmptyInteraction";
    case ErrorCode::kEmptyQuery: return "EmptyQuery";
    case ErrorCode::kUnknownRecord: return "UnknownRecord";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kPortFailure: return "PortFailure";
    case ErrorCode::kPortUnavailable: return "PortUnavailable";
    case ErrorCode::kRemoteParseFailure: return "RemoteParseFailure";
    case ErrorCode::kIdOrderViolation: return "IdOrderViolation";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kCorruptLine: return "CorruptLine";
    case ErrorCode::kCorpusParseError: return "CorpusParseError";
    case ErrorCode::kUnknownParam: return "UnknownParam";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace hmo
