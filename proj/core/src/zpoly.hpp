#pragma once

// Internal sparse multivariate polynomials over Z with packed exponent keys.
//
// A key stores the exponent of x_i in a fixed-width bit field, x_0 in the most
// significant field, so numeric order on keys is lexicographic order on
// monomials. For homogeneous polynomials lex and graded-lex coincide, which is
// what lets HomPoly hand its term list over without re-sorting.

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qasdyn::detail {

struct Layout {
  unsigned nvars = 1;
  unsigned bits = 32;

  static Layout for_nvars(std::size_t nvars);

  std::uint64_t max_exponent() const { return (std::uint64_t{1} << bits) - 1; }
  unsigned shift(unsigned var) const { return bits * (nvars - 1 - var); }
  std::uint64_t field_mask() const { return max_exponent(); }
  std::uint32_t exponent(std::uint64_t key, unsigned var) const {
    return static_cast<std::uint32_t>((key >> shift(var)) & field_mask());
  }
  std::uint64_t unit(unsigned var) const { return std::uint64_t{1} << shift(var); }
  std::uint64_t pack(std::span<const std::uint32_t> exps) const;
  std::uint64_t total_degree(std::uint64_t key) const;
  /// True when every exponent of `a` is >= the matching exponent of `b`.
  bool divides(std::uint64_t b, std::uint64_t a) const;
  std::uint64_t clear_var(std::uint64_t key, unsigned var) const { return key & ~(field_mask() << shift(var)); }

  friend bool operator==(const Layout&, const Layout&) = default;
};

struct ZTerm {
  std::uint64_t key;
  mpz_class coeff;
};

/// Terms strictly descending by key, no zero coefficients.
struct ZPoly {
  Layout layout;
  std::vector<ZTerm> terms;

  ZPoly() = default;
  explicit ZPoly(Layout l) : layout(l) {}

  static ZPoly constant(Layout l, const mpz_class& c);
  static ZPoly monomial(Layout l, std::uint64_t key, const mpz_class& c);

  bool is_zero() const { return terms.empty(); }
  std::size_t size() const { return terms.size(); }
  bool is_constant() const { return terms.empty() || (terms.size() == 1 && terms[0].key == 0); }
  const mpz_class& leading_coeff() const { return terms.front().coeff; }

  unsigned degree_in(unsigned var) const;
  std::uint64_t max_total_degree() const;
  /// Sorts, merges duplicate keys and drops zeros.
  void canonicalize();

  friend bool operator==(const ZPoly& a, const ZPoly& b);
};

/// Checks a prospective output size against the global term cap.
void check_term_budget(std::size_t terms, const char* what);

ZPoly add(const ZPoly& a, const ZPoly& b);
ZPoly sub(const ZPoly& a, const ZPoly& b);
ZPoly neg(ZPoly a);
ZPoly scale(ZPoly a, const mpz_class& s);
ZPoly mul(const ZPoly& a, const ZPoly& b);
ZPoly mul_monomial(ZPoly a, std::uint64_t key);
ZPoly pow(const ZPoly& a, unsigned e);

mpz_class content(const ZPoly& a);
/// Divides every coefficient by `d`, which must divide all of them.
ZPoly divexact_scalar(ZPoly a, const mpz_class& d);
/// a / content(a) with positive leading coefficient (zero stays zero).
ZPoly primitive_part(const ZPoly& a);
/// Multiplies by -1 when the leading coefficient is negative.
ZPoly positive_leading(ZPoly a);

/// Exact quotient a / b over Z, or nullopt when b does not divide a.
std::optional<ZPoly> divide(const ZPoly& a, const ZPoly& b);

/// p(comps[0], ..., comps[n-1]) by nested Horner evaluation; p's layout must
/// have comps.size() variables, comps share one layout.
ZPoly compose(const ZPoly& p, std::span<const ZPoly> comps);

/// Substitutes x_var = value; the variable's field becomes zero.
ZPoly eval_var(const ZPoly& a, unsigned var, const mpz_class& value);

/// Per-variable minimum exponent over all terms, as a key.
std::uint64_t monomial_content(const ZPoly& a);
/// Divides by the monomial `key` (which must divide every term).
ZPoly div_monomial(ZPoly a, std::uint64_t key);

enum class GcdRoute { Auto, Heuristic, Prs };

/// GCD over Z, normalized to positive leading coefficient. Route Heuristic
/// returns nullopt if the evaluation/interpolation path gives up; Prs always
/// succeeds; Auto tries Heuristic then falls back to Prs.
std::optional<ZPoly> gcd(const ZPoly& a, const ZPoly& b, GcdRoute route);

}  // namespace qasdyn::detail
