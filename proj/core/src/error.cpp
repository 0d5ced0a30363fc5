#include "hypodiff/error.hpp"

namespace hypodiff {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonMonotoneSizes: return "NonMonotoneSizes";
    case ErrorKind::ZeroPatternViolation: return "ZeroPatternViolation";
    case ErrorKind::RankDeficientSubdiagonal: return "RankDeficientSubdiagonal";
    case ErrorKind::NonPositiveLambda: return "NonPositiveLambda";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::NonPositiveElapsed: return "NonPositiveElapsed";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::IncompleteJet: return "IncompleteJet";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::NonSPDDiffusion: return "NonSPDDiffusion";
    case ErrorKind::StartOutsideRegion: return "StartOutsideRegion";
    case ErrorKind::InnerNotContained: return "InnerNotContained";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::NoSurvivors: return "NoSurvivors";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace hypodiff
