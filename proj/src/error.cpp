#include "qcwarp/error.hpp"

namespace qcwarp {

std::string_view to_token(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidMesh: return "invalid-mesh";
    case ErrorKind::DegenerateMap: return "degenerate-map";
    case ErrorKind::InadmissibleCoefficient: return "inadmissible-coefficient";
    case ErrorKind::UnderdeterminedSystem: return "underdetermined-system";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Fold: return "fold-error";
    case ErrorKind::Format: return "format-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

}  // namespace qcwarp
