#include "qasdyn/error.hpp"

namespace qasdyn {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::NonHomogeneous: return "NonHomogeneous";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::DegreeMismatch: return "DegreeMismatch";
    case Errc::NotDivisible: return "NotDivisible";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::ResourceLimit: return "ResourceLimit";
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::NotDominant: return "NotDominant";
    case Errc::AllZero: return "AllZero";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NonPositiveDegree: return "NonPositiveDegree";
    case Errc::DegenerateLambda: return "DegenerateLambda";
    case Errc::MultiplicityOutOfRange: return "MultiplicityOutOfRange";
    case Errc::PrecisionExhausted: return "PrecisionExhausted";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::DegreeConstraintViolated: return "DegreeConstraintViolated";
    case Errc::NormalizationViolated: return "NormalizationViolated";
    case Errc::CommonFactor: return "CommonFactor";
    case Errc::GenerationExhausted: return "GenerationExhausted";
    case Errc::OrbitHitIndeterminacy: return "OrbitHitIndeterminacy";
    case Errc::OrbitHitDivisor: return "OrbitHitDivisor";
    case Errc::NotConverged: return "NotConverged";
    case Errc::AmplificationOverflow: return "AmplificationOverflow";
    case Errc::InsufficientOKRegion: return "InsufficientOKRegion";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InputFormat: return "InputFormat";
    case Errc::InternalInvariant: return "InternalInvariant";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace qasdyn
