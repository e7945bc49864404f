#include "qasdyn/polycore.hpp"

#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <string>

#include "bridge.hpp"
#include "qasdyn/error.hpp"

namespace qasdyn {

struct PolyAccess {
  // Terms must already be canonical: sorted grlex-descending, nonzero, same degree.
  static HomPoly make(std::size_t nvars, std::vector<Term> terms) {
    HomPoly p(nvars);
    if (terms.empty()) return p;
    p.zero_ = false;
    p.degree_ = static_cast<std::uint32_t>(terms.front().monomial.degree());
#ifndef NDEBUG
    for (const auto& t : terms) {
      if (t.monomial.degree() != p.degree_ || t.coeff == 0) raise(Errc::InternalInvariant, "non-canonical term list");
    }
#endif
    p.terms_ = std::move(terms);
    return p;
  }
};

namespace detail {

ScaledZ to_z(const HomPoly& p) {
  const Layout L = Layout::for_nvars(p.nvars());
  ZPoly z(L);
  Integer den = 1;
  for (const auto& t : p.terms()) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), t.coeff.get_den_mpz_t());
  z.terms.reserve(p.size());
  for (const auto& t : p.terms()) {
    Integer c = t.coeff.get_num() * (den / t.coeff.get_den());
    z.terms.push_back({L.pack(t.monomial.exponents()), std::move(c)});
  }
  return {std::move(z), Rational(1, den)};
}

std::vector<ZPoly> to_z_common(std::span<const HomPoly> ps, Integer& denominator) {
  denominator = 1;
  for (const auto& p : ps) {
    for (const auto& t : p.terms()) mpz_lcm(denominator.get_mpz_t(), denominator.get_mpz_t(), t.coeff.get_den_mpz_t());
  }
  std::vector<ZPoly> out;
  out.reserve(ps.size());
  for (const auto& p : ps) {
    const Layout L = Layout::for_nvars(p.nvars());
    ZPoly z(L);
    z.terms.reserve(p.size());
    for (const auto& t : p.terms()) {
      z.terms.push_back({L.pack(t.monomial.exponents()), t.coeff.get_num() * (denominator / t.coeff.get_den())});
    }
    out.push_back(std::move(z));
  }
  return out;
}

HomPoly from_z(const ZPoly& z, const Rational& scale) {
  const Layout& L = z.layout;
  std::vector<Term> terms;
  if (scale == 0) return HomPoly(L.nvars);
  terms.reserve(z.size());
  std::vector<std::uint32_t> exps(L.nvars);
  for (const auto& t : z.terms) {
    for (unsigned v = 0; v < L.nvars; ++v) exps[v] = L.exponent(t.key, v);
    Rational c(t.coeff);
    if (scale != 1) c *= scale;
    terms.push_back({Monomial(exps), std::move(c)});
  }
  return PolyAccess::make(L.nvars, std::move(terms));
}

}  // namespace detail

using detail::from_z;
using detail::to_z;

namespace {

std::atomic<std::size_t> g_term_cap{kDefaultTermCap};

void check_arity(const HomPoly& a, const HomPoly& b, const char* op) {
  if (a.nvars() != b.nvars()) {
    raise(Errc::ArityMismatch, std::string(op) + ": operands have " + std::to_string(a.nvars()) + " and " +
                                   std::to_string(b.nvars()) + " variables");
  }
}

void check_homogeneous_sum(const HomPoly& a, const HomPoly& b) {
  if (!a.is_zero() && !b.is_zero() && a.degree() != b.degree()) {
    raise(Errc::NonHomogeneous, "sum of polynomials of degrees " + std::to_string(a.degree()) + " and " +
                                    std::to_string(b.degree()));
  }
}

}  // namespace

std::size_t term_cap() { return g_term_cap.load(std::memory_order_relaxed); }
void set_term_cap(std::size_t cap) { g_term_cap.store(cap, std::memory_order_relaxed); }

std::uint64_t Monomial::degree() const {
  return std::accumulate(exps_.begin(), exps_.end(), std::uint64_t{0});
}

std::strong_ordering grlex_compare(const Monomial& a, const Monomial& b) {
  if (auto c = a.degree() <=> b.degree(); c != 0) return c;
  const std::size_t n = std::min(a.nvars(), b.nvars());
  for (std::size_t i = 0; i < n; ++i) {
    if (auto c = a[i] <=> b[i]; c != 0) return c;
  }
  return a.nvars() <=> b.nvars();
}

HomPoly::HomPoly(std::size_t nvars) : nvars_(nvars) {
  require(nvars >= 1, Errc::InvalidArgument, "a polynomial needs at least one variable");
}

HomPoly HomPoly::constant(std::size_t nvars, const Rational& c) {
  if (c == 0) return HomPoly(nvars);
  return PolyAccess::make(nvars, {Term{Monomial::one(nvars), c}});
}

HomPoly HomPoly::variable(std::size_t nvars, std::size_t index) {
  require(index < nvars, Errc::InvalidArgument, "variable index out of range");
  std::vector<std::uint32_t> e(nvars, 0);
  e[index] = 1;
  return PolyAccess::make(nvars, {Term{Monomial(std::move(e)), Rational(1)}});
}

HomPoly HomPoly::monomial(const Monomial& m, const Rational& c) {
  if (c == 0) return HomPoly(m.nvars());
  return PolyAccess::make(m.nvars(), {Term{m, c}});
}

HomPoly HomPoly::from_terms(std::size_t nvars, std::vector<Term> terms) {
  for (const auto& t : terms) {
    require(t.monomial.nvars() == nvars, Errc::ArityMismatch, "monomial arity does not match the polynomial");
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& x, const Term& y) { return grlex_compare(x.monomial, y.monomial) > 0; });
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    if (!out.empty() && out.back().monomial == t.monomial) {
      out.back().coeff += t.coeff;
    } else {
      if (!out.empty() && out.back().coeff == 0) out.pop_back();
      out.push_back(std::move(t));
    }
  }
  if (!out.empty() && out.back().coeff == 0) out.pop_back();
  for (const auto& t : out) {
    if (t.monomial.degree() != out.front().monomial.degree()) {
      raise(Errc::NonHomogeneous, "terms of degrees " + std::to_string(out.front().monomial.degree()) + " and " +
                                      std::to_string(t.monomial.degree()));
    }
  }
  return PolyAccess::make(nvars, std::move(out));
}

std::uint32_t HomPoly::degree() const {
  require(!zero_, Errc::ZeroPolynomial, "the zero polynomial has no degree");
  return degree_;
}

const Term& HomPoly::leading_term() const {
  require(!zero_, Errc::ZeroPolynomial, "the zero polynomial has no leading term");
  return terms_.front();
}

bool operator==(const HomPoly& a, const HomPoly& b) {
  if (a.nvars_ != b.nvars_ || a.zero_ != b.zero_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].coeff != b.terms_[i].coeff || a.terms_[i].monomial != b.terms_[i].monomial) return false;
  }
  return true;
}

HomPoly operator+(const HomPoly& a, const HomPoly& b) {
  check_arity(a, b, "add");
  check_homogeneous_sum(a, b);
  const HomPoly both[] = {a, b};
  Integer den;
  auto zs = detail::to_z_common(both, den);
  return from_z(detail::add(zs[0], zs[1]), Rational(1, den));
}

HomPoly operator-(const HomPoly& a) {
  auto [z, s] = to_z(a);
  return from_z(z, -s);
}

HomPoly operator-(const HomPoly& a, const HomPoly& b) { return a + (-b); }

HomPoly operator*(const HomPoly& a, const HomPoly& b) {
  check_arity(a, b, "mul");
  auto za = to_z(a);
  auto zb = to_z(b);
  return from_z(detail::mul(za.z, zb.z), za.scale * zb.scale);
}

HomPoly operator*(const Rational& s, const HomPoly& a) {
  auto [z, sc] = to_z(a);
  return from_z(z, sc * s);
}

HomPoly pow(const HomPoly& a, unsigned e) {
  auto [z, s] = to_z(a);
  Rational se;
  mpz_pow_ui(se.get_num_mpz_t(), s.get_num_mpz_t(), e);
  mpz_pow_ui(se.get_den_mpz_t(), s.get_den_mpz_t(), e);
  return from_z(detail::pow(z, e), se);
}

HomPoly compose(const HomPoly& p, std::span<const HomPoly> comps) {
  if (comps.size() != p.nvars()) {
    raise(Errc::ArityMismatch, "compose: polynomial in " + std::to_string(p.nvars()) + " variables given " +
                                   std::to_string(comps.size()) + " components");
  }
  const std::size_t n = comps[0].nvars();
  std::optional<std::uint32_t> deg;
  for (const auto& c : comps) {
    require(c.nvars() == n, Errc::ArityMismatch, "compose: components have different arities");
    if (c.is_zero()) continue;
    if (deg && *deg != c.degree()) {
      raise(Errc::DegreeMismatch, "compose: components of degrees " + std::to_string(*deg) + " and " +
                                      std::to_string(c.degree()));
    }
    deg = c.degree();
  }
  if (p.is_zero()) return HomPoly(n);
  Integer den;
  auto zc = detail::to_z_common(comps, den);
  auto zp = to_z(p);
  Rational s = zp.scale;
  if (den != 1) {
    Integer dm;
    mpz_pow_ui(dm.get_mpz_t(), den.get_mpz_t(), p.degree());
    s /= dm;
  }
  return from_z(detail::compose(zp.z, zc), s);
}

namespace {

// a = content * primitive with primitive in Z[x], positive leading coefficient.
struct ZPrim {
  detail::ZPoly prim;
  Rational content;
};

ZPrim z_primitive(const HomPoly& p) {
  auto [z, s] = to_z(p);
  if (z.is_zero()) return {std::move(z), Rational(0)};
  Integer c = detail::content(z);
  if (z.leading_coeff() < 0) c = -c;
  ZPrim out{detail::divexact_scalar(std::move(z), c), s * c};
  out.content.canonicalize();
  return out;
}

detail::ZPoly homogenize(const detail::ZPoly& a, unsigned var) {
  const detail::Layout& L = a.layout;
  const std::uint64_t d = a.max_total_degree();
  detail::ZPoly r(L);
  for (const auto& t : a.terms) r.terms.push_back({t.key + (d - L.total_degree(t.key)) * L.unit(var), t.coeff});
  r.canonicalize();
  return r;
}

detail::ZPoly z_gcd(const detail::ZPoly& a, const detail::ZPoly& b, detail::GcdRoute route) {
  const detail::Layout& L = a.layout;
  if (a.is_zero()) return detail::primitive_part(b);
  if (b.is_zero()) return detail::primitive_part(a);
  const std::uint64_t ma = detail::monomial_content(a);
  const std::uint64_t mb = detail::monomial_content(b);
  std::uint64_t m = 0;
  for (unsigned v = 0; v < L.nvars; ++v) m |= std::uint64_t{std::min(L.exponent(ma, v), L.exponent(mb, v))} << L.shift(v);
  const detail::ZPoly pa = detail::primitive_part(detail::div_monomial(a, ma));
  const detail::ZPoly pb = detail::primitive_part(detail::div_monomial(b, mb));
  // Neither is divisible by the last variable now, so dehomogenizing is lossless.
  const unsigned last = L.nvars - 1;
  const detail::ZPoly da = detail::eval_var(pa, last, 1);
  const detail::ZPoly db = detail::eval_var(pb, last, 1);
  auto g = detail::gcd(da, db, route);
  if (!g) raise(Errc::ResourceLimit, "heuristic gcd gave up");
  detail::ZPoly h = detail::primitive_part(homogenize(*g, last));
  return detail::mul_monomial(std::move(h), m);
}

detail::GcdRoute route_of(GcdMethod m) {
  switch (m) {
    case GcdMethod::Heuristic:
      return detail::GcdRoute::Heuristic;
    case GcdMethod::Prs:
      return detail::GcdRoute::Prs;
    case GcdMethod::Auto:
      break;
  }
  return detail::GcdRoute::Auto;
}

}  // namespace

HomPoly gcd(const HomPoly& a, const HomPoly& b, GcdMethod method) {
  check_arity(a, b, "gcd");
  require(!(a.is_zero() && b.is_zero()), Errc::InvalidArgument, "gcd of two zero polynomials");
  const detail::ZPoly za = z_primitive(a).prim;
  const detail::ZPoly zb = z_primitive(b).prim;
  return from_z(z_gcd(za, zb, route_of(method)));
}

HomPoly gcd(std::span<const HomPoly> polys) {
  std::vector<HomPoly> nz;
  for (const auto& p : polys) {
    if (!p.is_zero()) nz.push_back(p);
  }
  require(!nz.empty(), Errc::AllZero, "gcd of an all-zero list");
  if (nz.size() == 1) return primitive(nz[0]);
  // One gcd against a combination of the rest usually suffices; verify by division.
  HomPoly combo = nz[1];
  for (std::size_t i = 2; i < nz.size(); ++i) combo = combo + Rational(static_cast<long>(2 * i + 1)) * nz[i];
  HomPoly g = combo.is_zero() ? primitive(nz[1]) : gcd(nz[0], combo);
  if (!combo.is_zero()) g = gcd(g, nz[1]);
  for (std::size_t i = 2; i < nz.size(); ++i) {
    if (g.is_one()) break;
    if (!try_div(nz[i], g)) g = gcd(g, nz[i]);
  }
  return g;
}

std::optional<HomPoly> try_div(const HomPoly& a, const HomPoly& b) {
  check_arity(a, b, "divide");
  require(!b.is_zero(), Errc::DivisionByZero, "division by the zero polynomial");
  if (a.is_zero()) return HomPoly(a.nvars());
  if (a.degree() < b.degree()) return std::nullopt;
  const ZPrim pa = z_primitive(a);
  const ZPrim pb = z_primitive(b);
  auto q = detail::divide(pa.prim, pb.prim);
  if (!q) return std::nullopt;
  return from_z(*q, pa.content / pb.content);
}

HomPoly exact_div(const HomPoly& a, const HomPoly& b) {
  auto q = try_div(a, b);
  if (!q) raise(Errc::NotDivisible, "divisor does not divide the dividend exactly");
  return std::move(*q);
}

IntPrimitiveForm primitive_form(const HomPoly& p) {
  if (p.is_zero()) return {Rational(1), p};
  ZPrim z = z_primitive(p);
  return {z.content, from_z(z.prim)};
}

HomPoly primitive(const HomPoly& p) {
  if (p.is_zero()) return p;
  return from_z(z_primitive(p).prim);
}

bool equal_up_to_scalar(const HomPoly& a, const HomPoly& b) {
  if (a.nvars() != b.nvars()) return false;
  if (a.is_zero() || b.is_zero()) return a.is_zero() && b.is_zero();
  return primitive(a) == primitive(b);
}

HomPoly partial(const HomPoly& p, std::size_t var) {
  require(var < p.nvars(), Errc::IndexOutOfRange, "partial: variable index out of range");
  std::vector<Term> out;
  for (const auto& t : p.terms()) {
    const std::uint32_t e = t.monomial[var];
    if (e == 0) continue;
    std::vector<std::uint32_t> exps = t.monomial.exponents();
    --exps[var];
    out.push_back({Monomial(std::move(exps)), t.coeff * e});
  }
  return HomPoly::from_terms(p.nvars(), std::move(out));
}

namespace {

template <class Value, class PowFn>
Value eval_terms(const HomPoly& p, std::size_t nvars, Value zero, PowFn&& power) {
  Value sum = std::move(zero);
  for (const auto& t : p.terms()) {
    Value term = power(0, t.monomial[0]);
    for (std::size_t v = 1; v < nvars; ++v) {
      if (t.monomial[v] != 0) term = term * power(v, t.monomial[v]);
    }
    sum = sum + t.coeff * term;
  }
  return sum;
}

// Power tables per variable, filled lazily up to the polynomial's degree.
template <class Value>
class PowerTable {
 public:
  PowerTable(std::span<const Value> point, const Value& one, unsigned max_e) {
    tables_.reserve(point.size());
    for (const auto& x : point) {
      std::vector<Value> row;
      row.reserve(max_e + 1);
      row.push_back(one);
      for (unsigned e = 1; e <= max_e; ++e) row.push_back(row.back() * x);
      tables_.push_back(std::move(row));
    }
  }
  const Value& operator()(std::size_t v, std::uint32_t e) const { return tables_[v][e]; }

 private:
  std::vector<std::vector<Value>> tables_;
};

// Gaussian rational, used for exact evaluation at binary floating inputs.
struct QCx {
  Rational re;
  Rational im;
  friend QCx operator+(const QCx& a, const QCx& b) { return {a.re + b.re, a.im + b.im}; }
  friend QCx operator*(const QCx& a, const QCx& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend QCx operator*(const Rational& s, const QCx& a) { return {s * a.re, s * a.im}; }
};

double round_nearest(const Rational& q) {
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, q.get_mpq_t(), MPFR_RNDN);
  const double d = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return d;
}

void check_point(const HomPoly& p, std::size_t n) {
  if (n != p.nvars()) {
    raise(Errc::ArityMismatch, "eval: polynomial in " + std::to_string(p.nvars()) + " variables at a point with " +
                                   std::to_string(n) + " coordinates");
  }
}

}  // namespace

Rational eval(const HomPoly& p, std::span<const Rational> point) {
  check_point(p, point.size());
  if (p.is_zero()) return 0;
  PowerTable<Rational> pw(point, Rational(1), p.degree());
  Rational r = eval_terms(p, p.nvars(), Rational(0), pw);
  return r;
}

std::complex<double> eval(const HomPoly& p, std::span<const std::complex<double>> point) {
  check_point(p, point.size());
  if (p.is_zero()) return {0.0, 0.0};
  for (const auto& z : point) {
    require(std::isfinite(z.real()) && std::isfinite(z.imag()), Errc::InvalidArgument, "eval: non-finite coordinate");
  }
  std::vector<QCx> q;
  q.reserve(point.size());
  for (const auto& z : point) q.push_back({Rational(z.real()), Rational(z.imag())});
  PowerTable<QCx> pw(q, QCx{1, 0}, p.degree());
  const QCx v = eval_terms(p, p.nvars(), QCx{0, 0}, pw);
  return {round_nearest(v.re), round_nearest(v.im)};
}

Cx<BigFloat> eval(const HomPoly& p, std::span<const Cx<BigFloat>> point, long precision_bits) {
  check_point(p, point.size());
  const BigFloat zero(0.0, precision_bits);
  if (p.is_zero()) return Cx<BigFloat>(zero, zero);
  std::vector<Cx<BigFloat>> pt;
  pt.reserve(point.size());
  for (const auto& z : point) pt.emplace_back(z.re.with_precision(precision_bits), z.im.with_precision(precision_bits));
  const Cx<BigFloat> one(BigFloat(1.0, precision_bits), zero);
  PowerTable<Cx<BigFloat>> pw(pt, one, p.degree());
  Cx<BigFloat> sum(zero, zero);
  for (const auto& t : p.terms()) {
    Cx<BigFloat> term = pw(0, t.monomial[0]);
    for (std::size_t v = 1; v < p.nvars(); ++v) {
      if (t.monomial[v] != 0) term *= pw(v, t.monomial[v]);
    }
    sum += BigFloat(t.coeff, precision_bits) * term;
  }
  return sum;
}

std::vector<std::string> default_var_names(std::size_t nvars) {
  if (nvars == 3) return {"z", "w", "t"};
  std::vector<std::string> v;
  for (std::size_t i = 0; i < nvars; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

}  // namespace qasdyn
