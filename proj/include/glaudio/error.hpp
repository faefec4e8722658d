#pragma once

#include <stdexcept>
#include <string>

namespace glaudio {

enum class ErrorCode {
  OutOfRangeEdge,
  SelfLoopInEdgeList,
  DuplicateEdge,
  MaskOverlap,
  DimensionMismatch,
  IsolatedVertexInNormalized,
  TimeOutOfRange,
  VertexOutOfRange,
  TooLargeForOracle,
  ConvergenceFailure,
  NonIntegralSpectrum,
  RepeatedEigenvalues,
  InsufficientSamples,
  BadDimensions,
  TapeMismatch,
  EmptyMask,
  LabelOutOfRange,
  ShapeMismatch,
  InvalidConfig,
  MalformedRow,
  EmptyFile,
  ParseError,
  VersionMismatch,
  InvalidArgument,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures surface as this exception; `code()` is stable and is
// what the CLI prints as the machine-readable error tag.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glaudio
