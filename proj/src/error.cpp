#include "linesect/error.hpp"

namespace linesect {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::ill_posed_basis: return "ill-posed basis";
    case ErrorKind::degenerate_geometry: return "degenerate geometry";
    case ErrorKind::shape_mismatch: return "shape mismatch";
    case ErrorKind::insufficient_family: return "insufficient moving family";
    case ErrorKind::ambiguous_preimage: return "ambiguous preimage";
    case ErrorKind::unresolved_multiplicity: return "unresolved multiplicity";
    case ErrorKind::infinite_intersections: return "infinite intersections";
  }
  return "unknown error";
}

}  // namespace linesect
