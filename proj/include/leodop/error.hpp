#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leodop {

enum class ErrorCode {
  // input / data
  ChecksumMismatch,
  MalformedField,
  TruncatedInput,
  ParseError,
  ValidationError,
  UnknownKey,
  InvalidArgument,
  EpochOutOfRange,
  UnsupportedOrbit,
  TargetUnreachable,
  NoPassInWindow,
  MultipleMinima,
  WindowNotVisible,
  PassExceeded,
  EmptyGrid,
  // numerical
  PropagationDiverged,
  NearSingularOrigin,
  DegenerateState,
  CoincidentPoints,
  ZeroElevation,
  MissingAcceleration,
  SingularNormalMatrix,
  DidNotConverge,
  OrbitBelowSurface,
  SingularGeometry,
  DegenerateCovariance,
  DegenerateSamples,
  TooFewConverged,
};

inline std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MalformedField: return "MalformedField";
    case ErrorCode::TruncatedInput: return "TruncatedInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorCode::UnsupportedOrbit: return "UnsupportedOrbit";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::NoPassInWindow: return "NoPassInWindow";
    case ErrorCode::MultipleMinima: return "MultipleMinima";
    case ErrorCode::WindowNotVisible: return "WindowNotVisible";
    case ErrorCode::PassExceeded: return "PassExceeded";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::PropagationDiverged: return "PropagationDiverged";
    case ErrorCode::NearSingularOrigin: return "NearSingularOrigin";
    case ErrorCode::DegenerateState: return "DegenerateState";
    case ErrorCode::CoincidentPoints: return "CoincidentPoints";
    case ErrorCode::ZeroElevation: return "ZeroElevation";
    case ErrorCode::MissingAcceleration: return "MissingAcceleration";
    case ErrorCode::SingularNormalMatrix: return "SingularNormalMatrix";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::OrbitBelowSurface: return "OrbitBelowSurface";
    case ErrorCode::SingularGeometry: return "SingularGeometry";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::TooFewConverged: return "TooFewConverged";
  }
  return "Unknown";
}

/// True for failures of the numerics (singular systems, divergence), as
/// opposed to bad input data.
inline bool is_numerical(ErrorCode code) {
  return code >= ErrorCode::PropagationDiverged;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace leodop
