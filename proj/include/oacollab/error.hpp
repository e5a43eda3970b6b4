#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oacollab {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteInput,
  DegenerateGradient,
  CollisionState,
  NonPositiveStiffness,
  NegativeDamping,
  ZeroObstacleDistance,
  BetaOutOfRange,
  PlanCollision,
  TrajectoryTooShort,
  FitDiverged,
  InsufficientConditions,
  CollidedTrialRejected,
  UnbalancedConfig,
  SessionComplete,
  NonPositiveWidth,
  NonPositiveMT,
  EmptySession,
  BadWeights,
  IoError,
  SchemaVersionMismatch,
  BindFailure,
  ClientDisconnected,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::CollisionState: return "CollisionState";
    case ErrorCode::NonPositiveStiffness: return "NonPositiveStiffness";
    case ErrorCode::NegativeDamping: return "NegativeDamping";
    case ErrorCode::ZeroObstacleDistance: return "ZeroObstacleDistance";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::PlanCollision: return "PlanCollision";
    case ErrorCode::TrajectoryTooShort: return "TrajectoryTooShort";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::InsufficientConditions: return "InsufficientConditions";
    case ErrorCode::CollidedTrialRejected: return "CollidedTrialRejected";
    case ErrorCode::UnbalancedConfig: return "UnbalancedConfig";
    case ErrorCode::SessionComplete: return "SessionComplete";
    case ErrorCode::NonPositiveWidth: return "NonPositiveWidth";
    case ErrorCode::NonPositiveMT: return "NonPositiveMT";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::ClientDisconnected: return "ClientDisconnected";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `code()` names the condition.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace oacollab
