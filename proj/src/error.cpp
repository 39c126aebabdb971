#include "dtnlab/error.hpp"

namespace dtnlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_resolution: return "invalid-resolution";
    case ErrorKind::ambiguous_projection: return "ambiguous-projection";
    case ErrorKind::cone_violation: return "cone-violation";
    case ErrorKind::degenerate_mesh: return "degenerate-mesh";
    case ErrorKind::solver_failure: return "solver-failure";
    case ErrorKind::resonance: return "resonance";
    case ErrorKind::spectral_failure: return "spectral-failure";
    case ErrorKind::range: return "range";
    case ErrorKind::shape: return "shape";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::ellipticity: return "ellipticity";
    case ErrorKind::pole_placement: return "pole-placement";
    case ErrorKind::unresolvable_scale: return "unresolvable-scale";
    case ErrorKind::degenerate_datum: return "degenerate-datum";
    case ErrorKind::usage: return "usage";
    case ErrorKind::domain: return "domain";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace dtnlab
