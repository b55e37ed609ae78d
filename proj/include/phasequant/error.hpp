#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phasequant {

enum class ErrorKind {
  InvalidPotential,
  NonPositiveEnergy,
  OutsideAllowedRegion,
  PoleAtPoint,
  ContourTooTight,
  NoConvergence,
  ZeroMomentumAtOrigin,
  PhasePole,
  NonPositivePhaseDerivative,
  TailTooLarge,
  BracketNotFound,
  GammaPole,
  EigenvaluePole,
  NotAnEigenvalue,
  InvalidArgument,
  SchemaMismatch,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for every solver failure; `kind` is what the CLI
// reports in its machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace phasequant
