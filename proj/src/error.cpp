#include "phasequant/error.hpp"

namespace phasequant {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPotential: return "InvalidPotential";
    case ErrorKind::NonPositiveEnergy: return "NonPositiveEnergy";
    case ErrorKind::OutsideAllowedRegion: return "OutsideAllowedRegion";
    case ErrorKind::PoleAtPoint: return "PoleAtPoint";
    case ErrorKind::ContourTooTight: return "ContourTooTight";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ZeroMomentumAtOrigin: return "ZeroMomentumAtOrigin";
    case ErrorKind::PhasePole: return "PhasePole";
    case ErrorKind::NonPositivePhaseDerivative: return "NonPositivePhaseDerivative";
    case ErrorKind::TailTooLarge: return "TailTooLarge";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::GammaPole: return "GammaPole";
    case ErrorKind::EigenvaluePole: return "EigenvaluePole";
    case ErrorKind::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

}  // namespace phasequant
