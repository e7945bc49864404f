#pragma once

// The planar family [P Q1 - R : P Q2 - R : P Q3 - R] with its normalization
// and three-valued preflight checks.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qasdyn/mapiter.hpp"
#include "qasdyn/polycore.hpp"
#include "qasdyn/specdeg.hpp"

namespace qasdyn {

enum class Verdict { Pass, Fail, Unknown };
std::string_view verdict_name(Verdict v);

struct FamilyInstance {
  HomPoly P, Q1, Q2, Q3, R;
  ProjMap map;
  RecurrenceSpec spec;  ///< d = deg P + deg Q1, h = deg P, n0 = 1
  std::vector<std::string> vars;

  /// P Q_j - R for j = 1, 2, 3, before any normalization.
  Lifting raw_components() const;
};

/// Throws ArityMismatch, DegreeConstraintViolated, NormalizationViolated,
/// CommonFactor or NotDominant.
FamilyInstance build_family_map(HomPoly P, HomPoly Q1, HomPoly Q2, HomPoly Q3, HomPoly R,
                                std::vector<std::string> vars = {});

struct Cor1Result {
  Verdict verdict = Verdict::Fail;
  HomPoly q_gcd;   ///< gcd(Q2 - Q1, Q3 - Q1); zero if either difference is zero
  HomPoly pr_gcd;  ///< gcd(P, R)
};

Cor1Result check_cor1(const FamilyInstance& inst);

/// A common zero of P and R, scaled so its largest coordinate is 1.
struct CommonZero {
  std::array<Cx<BigFloat>, 3> point;
  BigFloat radius;                              ///< estimated coordinate error
  std::optional<std::array<Rational, 3>> exact;  ///< set when recognized and verified exactly
};

struct Cor2Result {
  Verdict finiteness = Verdict::Unknown;  ///< preimage of [1:1:1] under [Q1:Q2:Q3] is finite
  Verdict surrogate = Verdict::Unknown;   ///< Q1 - Q3, Q2 - Q3 not both zero on {P = 0} and {R = 0}
  Verdict verdict = Verdict::Unknown;
  std::vector<CommonZero> zeros;
  std::optional<std::size_t> witness;  ///< index into `zeros` of a failing or undecided point
  long precision_hint = 0;             ///< suggested precision when Unknown
  std::string detail;
};

Cor2Result check_cor2(const FamilyInstance& inst, long precision_bits);

struct Cor3Result {
  std::array<std::array<Rational, 3>, 3> jacobian;  ///< rows d(P Q_j - R) at (1,1,1)
  unsigned rank = 0;
  Verdict rank_verdict = Verdict::Fail;
  Verdict pencil = Verdict::Unknown;  ///< Pass is randomized evidence, Fail is exact
  bool pencil_randomized = true;
  std::optional<std::array<Integer, 3>> pencil_witness;
  std::size_t triples_tested = 0;
};

/// Throws InternalInvariant if a Jacobian row is not orthogonal to (1,1,1).
Cor3Result check_cor3(const FamilyInstance& inst, std::size_t samples, std::uint64_t seed);

struct PreflightReport {
  Cor1Result cor1;
  Cor2Result cor2;
  Cor3Result cor3;
  Verdict overall = Verdict::Unknown;
};

PreflightReport preflight(const FamilyInstance& inst, long precision_bits, std::size_t samples, std::uint64_t seed);

/// Dense integer coefficients in [-coeff_bound, coeff_bound], normalized and
/// filtered through build_family_map and check_cor1. Deterministic in `seed`.
/// Throws InvalidArgument on bad parameters, GenerationExhausted on too many rejections.
FamilyInstance random_family(unsigned deg_p, unsigned deg_q, unsigned coeff_bound, std::uint64_t seed);

/// Map file plus `P`, `Q1`, `Q2`, `Q3`, `R` lines. `map` lines, if present,
/// must agree with the induced map.
FamilyInstance parse_family_file(std::string_view text);
std::string format_family_file(const FamilyInstance& inst);

}  // namespace qasdyn
