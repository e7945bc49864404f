#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qasdyn {

/// Failure categories raised by the library. Every thrown qasdyn::Error carries
/// one of these so callers (and the CLI) can branch without parsing messages.
enum class Errc {
  // polycore
  SyntaxError,
  NonHomogeneous,
  UnknownVariable,
  ArityMismatch,
  DegreeMismatch,
  NotDivisible,
  DivisionByZero,
  ResourceLimit,
  ZeroPolynomial,
  // mapiter
  NotDominant,
  AllZero,
  IndexOutOfRange,
  ZeroVector,
  // specdeg
  NonPositiveDegree,
  DegenerateLambda,
  MultiplicityOutOfRange,
  PrecisionExhausted,
  InsufficientData,
  // family2
  DegreeConstraintViolated,
  NormalizationViolated,
  CommonFactor,
  GenerationExhausted,
  // greenpot
  OrbitHitIndeterminacy,
  OrbitHitDivisor,
  NotConverged,
  AmplificationOverflow,
  InsufficientOKRegion,
  // generic
  InvalidArgument,
  InputFormat,
  InternalInvariant,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace qasdyn
