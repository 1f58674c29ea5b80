#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyflow {

enum class ErrorKind {
  InvalidArgument,
  InvalidGrid,
  GridMismatch,
  NonFinite,
  InvalidBackground,
  NotNormalized,
  Divergence,
  StepTooSmall,
  NonZeroMean,
  NoConvergence,
  NotBalanced,
  NotTangent,
  ResolutionTooCoarse,
  BumpDoesNotFit,
  NotUnstable,
  CertificateFailed,
  EmptyReport,
  BoundViolation,
  SnapshotFormat,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cyflow
