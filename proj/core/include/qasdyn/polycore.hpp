#pragma once

// Exact sparse homogeneous polynomials over Q.

#include <gmpxx.h>

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qasdyn/bigfloat.hpp"
#include "qasdyn/complex.hpp"

namespace qasdyn {

using Integer = mpz_class;
using Rational = mpq_class;

class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<std::uint32_t> exponents) : exps_(std::move(exponents)) {}
  static Monomial one(std::size_t nvars) { return Monomial(std::vector<std::uint32_t>(nvars, 0)); }

  std::size_t nvars() const { return exps_.size(); }
  std::uint32_t operator[](std::size_t i) const { return exps_[i]; }
  std::uint64_t degree() const;
  const std::vector<std::uint32_t>& exponents() const { return exps_; }

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<std::uint32_t> exps_;
};

/// Graded-lex: larger total degree is greater; ties are lexicographic with
/// x0 > x1 > ... > xk. Polynomials keep their terms in descending order.
std::strong_ordering grlex_compare(const Monomial& a, const Monomial& b);

struct Term {
  Monomial monomial;
  Rational coeff;
};

/// Homogeneous polynomial in a fixed number of variables with exact rational
/// coefficients. Immutable once built; the zero polynomial carries no degree.
class HomPoly {
 public:
  /// The zero polynomial in `nvars` variables.
  explicit HomPoly(std::size_t nvars = 1);

  static HomPoly zero(std::size_t nvars) { return HomPoly(nvars); }
  static HomPoly constant(std::size_t nvars, const Rational& c);
  static HomPoly variable(std::size_t nvars, std::size_t index);
  static HomPoly monomial(const Monomial& m, const Rational& c);
  /// Merges duplicate monomials, drops zero coefficients and sorts.
  /// Throws NonHomogeneous if the surviving terms have different degrees.
  static HomPoly from_terms(std::size_t nvars, std::vector<Term> terms);

  std::size_t nvars() const { return nvars_; }
  bool is_zero() const { return zero_; }
  /// Throws ZeroPolynomial for the zero polynomial.
  std::uint32_t degree() const;
  std::size_t size() const { return terms_.size(); }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& leading_term() const;
  bool is_constant() const { return !zero_ && degree_ == 0; }
  bool is_one() const { return is_constant() && terms_[0].coeff == 1; }

  friend bool operator==(const HomPoly& a, const HomPoly& b);

 private:
  std::size_t nvars_;
  std::uint32_t degree_ = 0;
  bool zero_ = true;
  std::vector<Term> terms_;

  friend struct PolyAccess;
};

/// content * primitive == input; primitive has coprime integer coefficients
/// and a positive leading coefficient, so the sign of the input lives in content.
struct IntPrimitiveForm {
  Rational content;
  HomPoly primitive;
};

// Resource guard shared by all operations that can blow up.
constexpr std::size_t kDefaultTermCap = 2'000'000;
std::size_t term_cap();
void set_term_cap(std::size_t cap);

class TermCapGuard {
 public:
  explicit TermCapGuard(std::size_t cap) : saved_(term_cap()) { set_term_cap(cap); }
  ~TermCapGuard() { set_term_cap(saved_); }
  TermCapGuard(const TermCapGuard&) = delete;
  TermCapGuard& operator=(const TermCapGuard&) = delete;

 private:
  std::size_t saved_;
};

HomPoly operator+(const HomPoly& a, const HomPoly& b);
HomPoly operator-(const HomPoly& a, const HomPoly& b);
HomPoly operator-(const HomPoly& a);
HomPoly operator*(const HomPoly& a, const HomPoly& b);
HomPoly operator*(const Rational& s, const HomPoly& a);
HomPoly pow(const HomPoly& a, unsigned e);

/// p(comps[0], ..., comps[k]). All comps share one arity and one degree.
HomPoly compose(const HomPoly& p, std::span<const HomPoly> comps);

enum class GcdMethod {
  Auto,       ///< heuristic evaluation/interpolation, falling back to PRS
  Heuristic,  ///< heuristic only; throws ResourceLimit if it gives up
  Prs,        ///< primitive pseudo-remainder sequences only
};

/// Greatest common divisor in IntPrimitiveForm normalization. A constant gcd is 1.
HomPoly gcd(const HomPoly& a, const HomPoly& b, GcdMethod method = GcdMethod::Auto);
/// gcd of a whole list (at least one nonzero member).
HomPoly gcd(std::span<const HomPoly> polys);

/// q with q * b == a; NotDivisible otherwise.
HomPoly exact_div(const HomPoly& a, const HomPoly& b);
std::optional<HomPoly> try_div(const HomPoly& a, const HomPoly& b);

IntPrimitiveForm primitive_form(const HomPoly& p);
/// Shorthand for primitive_form(p).primitive; zero maps to zero.
HomPoly primitive(const HomPoly& p);
/// True when a == c * b for some nonzero rational c.
bool equal_up_to_scalar(const HomPoly& a, const HomPoly& b);

HomPoly partial(const HomPoly& p, std::size_t var);

Rational eval(const HomPoly& p, std::span<const Rational> point);
/// Evaluated exactly on the binary values of the inputs, then rounded once.
std::complex<double> eval(const HomPoly& p, std::span<const std::complex<double>> point);
Cx<BigFloat> eval(const HomPoly& p, std::span<const Cx<BigFloat>> point, long precision_bits);

/// Parses the polynomial grammar over the given ordered variable names.
HomPoly parse_poly(std::string_view text, std::span<const std::string> vars);
/// Canonical printed form; parse_poly(to_string(p, v), v) == p.
std::string to_string(const HomPoly& p, std::span<const std::string> vars);
/// Default names: z, w, t for three variables, otherwise x0..xk.
std::vector<std::string> default_var_names(std::size_t nvars);

}  // namespace qasdyn
