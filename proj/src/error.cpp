#include "tgqa/error.hpp"

namespace tgqa {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDuplicateEndpoint: return "DuplicateEndpoint";
    case ErrorCode::kInvertedInterval: return "InvertedInterval";
    case ErrorCode::kMissingEndpoint: return "MissingEndpoint";
    case ErrorCode::kGranularityMismatch: return "GranularityMismatch";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kInvalidTime: return "InvalidTime";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kUnparsableTime: return "UnparsableTime";
    case ErrorCode::kUnknownEntity: return "UnknownEntity";
    case ErrorCode::kUnsatisfiableSplit: return "UnsatisfiableSplit";
    case ErrorCode::kPoolExhausted: return "PoolExhausted";
    case ErrorCode::kPoolCollision: return "PoolCollision";
    case ErrorCode::kUnmappedEntity: return "UnmappedEntity";
    case ErrorCode::kAmbiguousTie: return "AmbiguousTie";
    case ErrorCode::kNegativeYear: return "NegativeYear";
    case ErrorCode::kNoAcceptedCoT: return "NoAcceptedCoT";
    case ErrorCode::kEmptyGeneration: return "EmptyGeneration";
    case ErrorCode::kNoExtractorConfigured: return "NoExtractorConfigured";
    case ErrorCode::kUnparsableTimeline: return "UnparsableTimeline";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kUnknownFlag: return "UnknownFlag";
    case ErrorCode::kStalePatch: return "StalePatch";
    case ErrorCode::kReviewIncomplete: return "ReviewIncomplete";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kNoLogprobSupport: return "NoLogprobSupport";
    case ErrorCode::kMissingSlot: return "MissingSlot";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kStageInputMissing: return "StageInputMissing";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kOracleMismatch: return "OracleMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

int exitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigInvalid:
    case ErrorCode::kStageInputMissing:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownTemplate:
    case ErrorCode::kMissingSlot:
      return 2;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kTimeout:
    case ErrorCode::kAuthFailure:
    case ErrorCode::kNoLogprobSupport:
    case ErrorCode::kEmptyGeneration:
      return 3;
    default:
      return 4;
  }
}

}  // namespace tgqa
