#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtnlab {

enum class ErrorKind {
  invalid_resolution,
  ambiguous_projection,
  cone_violation,
  degenerate_mesh,
  solver_failure,
  resonance,
  spectral_failure,
  range,
  shape,
  singularity,
  ellipticity,
  pole_placement,
  unresolvable_scale,
  degenerate_datum,
  usage,
  domain,
  geometry,
  non_convergence,
  io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library is reported through this type; `kind()`
/// lets callers (and the CLI) name the failing stage without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dtnlab
