#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linkrec {

enum class ErrorCode {
  NotARepository,
  GitInvocationFailure,
  UnknownCommit,
  InvalidPattern,
  EmptyGroundTruth,
  InsufficientTestIssues,
  MissingIssueMetadata,
  DimensionMismatch,
  ZeroVector,
  EmptyIndex,
  ProviderFailure,
  EmptyCorpus,
  EmptyCandidates,
  TooManyCandidates,
  ClientFailure,
  EmptyProject,
  DegenerateSamples,
  ZeroVariance,
  MissingUpstream,
  ConfigInvalid,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// CLI exit status: 2 config, 3 upstream artifact, 4 provider/client, 5 internal.
int exit_code_for(ErrorCode code);

// Exception type thrown by every linkrec module. The code identifies the
// failure class; the message carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace linkrec
