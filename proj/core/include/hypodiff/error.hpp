#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypodiff {

/// Failure categories raised by the library. Every operation reports errors
/// by throwing hypodiff::Error carrying one of these kinds.
enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  // geometry
  NonMonotoneSizes,
  ZeroPatternViolation,
  RankDeficientSubdiagonal,
  NonPositiveLambda,
  // kernel
  SingularCovariance,
  NonPositiveElapsed,
  StepTooLarge,
  // calculus
  IncompleteJet,
  DegenerateCloud,
  EmptyRegion,
  // simulate
  NonSPDDiffusion,
  StartOutsideRegion,
  InnerNotContained,
  // density
  EmptyGrid,
  NoSurvivors,
  // cli
  ConfigParse,
  Validation,
  SchemaMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace hypodiff
