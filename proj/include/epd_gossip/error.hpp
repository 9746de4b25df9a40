#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epd_gossip {

enum class ErrorKind {
  RejectNotNormalized,
  RejectDrift,
  RejectDegenerate,
  RejectEmpty,
  InvalidArgument,
  DimensionMismatch,
  PeriodicityDetected,
  NotAperiodic,
  NotSymmetric,
  InvalidParameters,
  DomainError,
  OutOfMemory,
  SnapshotMissing,
  ResolutionTooLow,
  QuadratureUnresolved,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RejectNotNormalized: return "RejectNotNormalized";
    case ErrorKind::RejectDrift: return "RejectDrift";
    case ErrorKind::RejectDegenerate: return "RejectDegenerate";
    case ErrorKind::RejectEmpty: return "RejectEmpty";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PeriodicityDetected: return "PeriodicityDetected";
    case ErrorKind::NotAperiodic: return "NotAperiodic";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::InvalidParameters: return "InvalidParameters";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::OutOfMemory: return "OutOfMemory";
    case ErrorKind::SnapshotMissing: return "SnapshotMissing";
    case ErrorKind::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorKind::QuadratureUnresolved: return "QuadratureUnresolved";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace epd_gossip
