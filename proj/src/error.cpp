#include "linkrec/error.hpp"

namespace linkrec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotARepository: return "NotARepository";
    case ErrorCode::GitInvocationFailure: return "GitInvocationFailure";
    case ErrorCode::UnknownCommit: return "UnknownCommit";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::InsufficientTestIssues: return "InsufficientTestIssues";
    case ErrorCode::MissingIssueMetadata: return "MissingIssueMetadata";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::TooManyCandidates: return "TooManyCandidates";
    case ErrorCode::ClientFailure: return "ClientFailure";
    case ErrorCode::EmptyProject: return "EmptyProject";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::MissingUpstream: return "MissingUpstream";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidPattern:
    case ErrorCode::NotARepository:
      return 2;
    case ErrorCode::MissingUpstream:
    case ErrorCode::ParseError:
    case ErrorCode::EmptyGroundTruth:
    case ErrorCode::InsufficientTestIssues:
    case ErrorCode::MissingIssueMetadata:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptyIndex:
    case ErrorCode::EmptyProject:
      return 3;
    case ErrorCode::ProviderFailure:
    case ErrorCode::ClientFailure:
      return 4;
    default:
      return 5;
  }
}

}  // namespace linkrec
