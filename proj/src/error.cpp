// SPDX-License-Identifier: Apache-2.0
#include "paircal/error.hpp"

namespace paircal {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::InvalidSecondOrder: return "InvalidSecondOrder";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::InvalidBeta: return "InvalidBeta";
    case ErrorCode::InvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::NonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::ZeroProbabilityTarget: return "ZeroProbabilityTarget";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::TooFewMembers: return "TooFewMembers";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TrajectoryTooLong: return "TrajectoryTooLong";
    case ErrorCode::TooFewAnnotations: return "TooFewAnnotations";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::ZeroModelProbabilityOnObserved: return "ZeroModelProbabilityOnObserved";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace paircal
