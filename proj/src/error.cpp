#include "rlab/error.hpp"

namespace rlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::FormatError: return "format-error";
    case ErrorKind::TrainingDiverged: return "training-diverged";
    case ErrorKind::UndefinedRatio: return "undefined-ratio";
    case ErrorKind::IntegrationDiverged: return "integration-diverged";
    case ErrorKind::OutOfRegime: return "out-of-regime";
    case ErrorKind::DegenerateKernel: return "degenerate-kernel";
  }
  return "unknown-error";
}

}  // namespace rlab
