// Multivariate GCD over Z.
//
// Two independent routes:
//  - heuristic: evaluate one variable at a large integer, recurse, rebuild the
//    candidate from its xi-adic expansion and accept it only after exact
//    division of both inputs;
//  - prs: recursive primitive pseudo-remainder sequences in the highest
//    variable, contents computed recursively in the remaining ones.

#include <algorithm>
#include <map>

#include "qasdyn/error.hpp"
#include "zpoly.hpp"

namespace qasdyn::detail {

namespace {

// Integers above this size make the heuristic route give up.
constexpr std::size_t kHeuristicBitCap = std::size_t{1} << 26;

int highest_var(const ZPoly& a, const ZPoly& b) {
  const Layout& L = a.layout;
  for (int v = static_cast<int>(L.nvars) - 1; v >= 0; --v) {
    if (a.degree_in(v) > 0 || b.degree_in(v) > 0) return v;
  }
  return -1;
}

int lowest_var(const ZPoly& a, const ZPoly& b) {
  const Layout& L = a.layout;
  for (unsigned v = 0; v < L.nvars; ++v) {
    if (a.degree_in(v) > 0 || b.degree_in(v) > 0) return static_cast<int>(v);
  }
  return -1;
}

mpz_class max_norm(const ZPoly& a) {
  mpz_class m = 0;
  for (const auto& t : a.terms) {
    if (abs(t.coeff) > m) m = abs(t.coeff);
  }
  return m;
}

mpz_class smod(const mpz_class& c, const mpz_class& xi) {
  mpz_class r;
  mpz_fdiv_r(r.get_mpz_t(), c.get_mpz_t(), xi.get_mpz_t());
  if (2 * r > xi) r -= xi;
  return r;
}

// Rebuilds a polynomial in `var` from the integer-coefficient image gamma = G(xi).
std::optional<ZPoly> xi_adic(ZPoly gamma, const mpz_class& xi, unsigned var) {
  const Layout& L = gamma.layout;
  ZPoly g(L);
  std::uint64_t e = 0;
  while (!gamma.is_zero()) {
    if (e > L.max_exponent()) return std::nullopt;
    ZPoly digit(L);
    for (const auto& t : gamma.terms) {
      mpz_class c = smod(t.coeff, xi);
      if (c != 0) digit.terms.push_back({t.key, c});
    }
    for (const auto& t : digit.terms) g.terms.push_back({t.key + (e << L.shift(var)), t.coeff});
    gamma = sub(gamma, digit);
    for (auto& t : gamma.terms) mpz_divexact(t.coeff.get_mpz_t(), t.coeff.get_mpz_t(), xi.get_mpz_t());
    ++e;
  }
  g.canonicalize();
  return g;
}

std::optional<ZPoly> gcd_heuristic(const ZPoly& a, const ZPoly& b) {
  const Layout& L = a.layout;
  if (a.is_zero()) return positive_leading(b);
  if (b.is_zero()) return positive_leading(a);
  const mpz_class ca = content(a);
  const mpz_class cb = content(b);
  mpz_class c;
  mpz_gcd(c.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
  const int var = lowest_var(a, b);
  if (var < 0) return ZPoly::constant(L, c);
  const ZPoly pa = divexact_scalar(a, ca);
  const ZPoly pb = divexact_scalar(b, cb);
  const unsigned deg = std::max(pa.degree_in(var), pb.degree_in(var));
  mpz_class xi = 2 * std::min(max_norm(pa), max_norm(pb)) + 2;
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (mpz_sizeinbase(xi.get_mpz_t(), 2) * (deg + 1) > kHeuristicBitCap) return std::nullopt;
    const ZPoly ea = eval_var(pa, var, xi);
    const ZPoly eb = eval_var(pb, var, xi);
    if (auto gamma = gcd_heuristic(ea, eb)) {
      if (auto cand = xi_adic(std::move(*gamma), xi, var)) {
        ZPoly g = primitive_part(*cand);
        if (!g.is_zero() && divide(pa, g) && divide(pb, g)) return scale(std::move(g), c);
      }
    }
    xi = (xi * 73794) / 27011;
  }
  return std::nullopt;
}

// --- primitive PRS route ---------------------------------------------------

std::map<unsigned, ZPoly> coeffs_in(const ZPoly& a, unsigned var) {
  std::map<unsigned, ZPoly> out;
  for (const auto& t : a.terms) {
    auto [it, inserted] = out.try_emplace(a.layout.exponent(t.key, var), a.layout);
    it->second.terms.push_back({a.layout.clear_var(t.key, var), t.coeff});
  }
  return out;
}

ZPoly gcd_prs(const ZPoly& a, const ZPoly& b);

ZPoly content_in(const ZPoly& a, unsigned var) {
  ZPoly g(a.layout);
  for (auto& [e, c] : coeffs_in(a, var)) {
    g = gcd_prs(g, c);
    if (g.is_constant() && g.size() == 1 && g.terms[0].coeff == 1) break;
  }
  return g;
}

ZPoly leading_in(const ZPoly& a, unsigned var) { return std::prev(coeffs_in(a, var).end())->second; }

ZPoly pseudo_rem(ZPoly r, const ZPoly& b, unsigned var) {
  const unsigned db = b.degree_in(var);
  const ZPoly lb = leading_in(b, var);
  while (!r.is_zero() && r.degree_in(var) >= db) {
    const unsigned e = r.degree_in(var) - db;
    const ZPoly lr = leading_in(r, var);
    r = sub(mul(lb, r), mul_monomial(mul(lr, b), static_cast<std::uint64_t>(e) << r.layout.shift(var)));
  }
  return r;
}

ZPoly gcd_prs(const ZPoly& a, const ZPoly& b) {
  const Layout& L = a.layout;
  if (a.is_zero()) return positive_leading(b);
  if (b.is_zero()) return positive_leading(a);
  const int v = highest_var(a, b);
  if (v < 0) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), a.terms[0].coeff.get_mpz_t(), b.terms[0].coeff.get_mpz_t());
    return ZPoly::constant(L, g);
  }
  const unsigned var = static_cast<unsigned>(v);
  const ZPoly ca = content_in(a, var);
  const ZPoly cb = content_in(b, var);
  const ZPoly c = gcd_prs(ca, cb);
  ZPoly p = *divide(a, ca);
  ZPoly q = *divide(b, cb);
  if (p.degree_in(var) < q.degree_in(var)) std::swap(p, q);
  ZPoly g(L);
  while (true) {
    if (q.degree_in(var) == 0) {
      g = ZPoly::constant(L, 1);
      break;
    }
    ZPoly r = pseudo_rem(p, q, var);
    if (r.is_zero()) {
      g = q;
      break;
    }
    p = std::move(q);
    q = *divide(r, content_in(r, var));
  }
  return positive_leading(mul(c, g));
}

}  // namespace

std::optional<ZPoly> gcd(const ZPoly& a, const ZPoly& b, GcdRoute route) {
  switch (route) {
    case GcdRoute::Heuristic:
      return gcd_heuristic(a, b);
    case GcdRoute::Prs:
      return gcd_prs(a, b);
    case GcdRoute::Auto:
      if (auto g = gcd_heuristic(a, b)) return g;
      return gcd_prs(a, b);
  }
  return std::nullopt;
}

}  // namespace qasdyn::detail
