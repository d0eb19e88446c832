#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tgqa {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto process exit codes (see exitCodeFor).
enum class ErrorCode {
  // tg-core
  kDuplicateEndpoint,
  kInvertedInterval,
  kMissingEndpoint,
  kGranularityMismatch,
  kMalformedLine,
  kInvalidTime,
  // kg-ingest
  kMalformedRow,
  kUnparsableTime,
  kUnknownEntity,
  kUnsatisfiableSplit,
  kPoolExhausted,
  kPoolCollision,
  kUnmappedEntity,
  // qa-gen
  kAmbiguousTie,
  // graph-augment
  kNegativeYear,
  // cot-bootstrap
  kNoAcceptedCoT,
  kEmptyGeneration,
  // text2tg
  kNoExtractorConfigured,
  kUnparsableTimeline,
  // story-qc
  kEmptyGraph,
  kUnknownFlag,
  kStalePatch,
  kReviewIncomplete,
  kIoFailure,
  // model-backend
  kBackendUnavailable,
  kTimeout,
  kAuthFailure,
  kNoLogprobSupport,
  kMissingSlot,
  kUnknownTemplate,
  // cli / persistence
  kConfigInvalid,
  kStageInputMissing,
  kSchemaViolation,
  kOracleMismatch,
  kInvalidArgument,
};

std::string_view errorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// 0 ok, 2 config error, 3 backend error, 4 data error.
int exitCodeFor(ErrorCode code);

}  // namespace tgqa
