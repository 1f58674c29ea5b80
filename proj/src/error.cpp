#include "cyflow/error.hpp"

namespace cyflow {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidBackground: return "InvalidBackground";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::Divergence: return "Divergence";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotBalanced: return "NotBalanced";
    case ErrorKind::NotTangent: return "NotTangent";
    case ErrorKind::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorKind::BumpDoesNotFit: return "BumpDoesNotFit";
    case ErrorKind::NotUnstable: return "NotUnstable";
    case ErrorKind::CertificateFailed: return "CertificateFailed";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::SnapshotFormat: return "SnapshotFormat";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace cyflow
