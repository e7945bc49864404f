#include "zpoly.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>

#include "qasdyn/error.hpp"
#include "qasdyn/polycore.hpp"

namespace qasdyn::detail {

Layout Layout::for_nvars(std::size_t nvars) {
  require(nvars >= 1 && nvars <= 32, Errc::ResourceLimit,
          "polynomials in " + std::to_string(nvars) + " variables exceed the packed-exponent layout (max 32)");
  Layout l;
  l.nvars = static_cast<unsigned>(nvars);
  l.bits = std::min<unsigned>(32, 64 / l.nvars);
  return l;
}

std::uint64_t Layout::pack(std::span<const std::uint32_t> exps) const {
  std::uint64_t key = 0;
  std::uint64_t total = 0;
  for (unsigned i = 0; i < nvars; ++i) total += exps[i];
  require(total <= max_exponent(), Errc::ResourceLimit,
          "total degree " + std::to_string(total) + " exceeds packed exponent range");
  for (unsigned i = 0; i < nvars; ++i) key |= static_cast<std::uint64_t>(exps[i]) << shift(i);
  return key;
}

std::uint64_t Layout::total_degree(std::uint64_t key) const {
  std::uint64_t t = 0;
  for (unsigned i = 0; i < nvars; ++i) t += exponent(key, i);
  return t;
}

bool Layout::divides(std::uint64_t b, std::uint64_t a) const {
  for (unsigned i = 0; i < nvars; ++i) {
    if (exponent(a, i) < exponent(b, i)) return false;
  }
  return true;
}

ZPoly ZPoly::constant(Layout l, const mpz_class& c) {
  ZPoly p(l);
  if (c != 0) p.terms.push_back({0, c});
  return p;
}

ZPoly ZPoly::monomial(Layout l, std::uint64_t key, const mpz_class& c) {
  ZPoly p(l);
  if (c != 0) p.terms.push_back({key, c});
  return p;
}

unsigned ZPoly::degree_in(unsigned var) const {
  unsigned d = 0;
  for (const auto& t : terms) d = std::max(d, layout.exponent(t.key, var));
  return d;
}

std::uint64_t ZPoly::max_total_degree() const {
  std::uint64_t d = 0;
  for (const auto& t : terms) d = std::max(d, layout.total_degree(t.key));
  return d;
}

void ZPoly::canonicalize() {
  std::sort(terms.begin(), terms.end(), [](const ZTerm& a, const ZTerm& b) { return a.key > b.key; });
  std::vector<ZTerm> out;
  out.reserve(terms.size());
  for (auto& t : terms) {
    if (!out.empty() && out.back().key == t.key) {
      out.back().coeff += t.coeff;
    } else {
      if (!out.empty() && out.back().coeff == 0) out.pop_back();
      out.push_back(std::move(t));
    }
  }
  if (!out.empty() && out.back().coeff == 0) out.pop_back();
  terms = std::move(out);
}

bool operator==(const ZPoly& a, const ZPoly& b) {
  if (a.terms.size() != b.terms.size()) return false;
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].key != b.terms[i].key || a.terms[i].coeff != b.terms[i].coeff) return false;
  }
  return true;
}

void check_term_budget(std::size_t terms, const char* what) {
  if (terms > term_cap()) {
    raise(Errc::ResourceLimit, std::string(what) + " would produce " + std::to_string(terms) +
                                   " terms, above the cap of " + std::to_string(term_cap()));
  }
}

namespace {

template <class Combine>
ZPoly merge(const ZPoly& a, const ZPoly& b, Combine combine_b) {
  ZPoly r(a.layout);
  r.terms.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.terms[i].key > b.terms[j].key)) {
      r.terms.push_back(a.terms[i++]);
    } else if (i == a.size() || b.terms[j].key > a.terms[i].key) {
      r.terms.push_back({b.terms[j].key, combine_b(b.terms[j].coeff)});
      ++j;
    } else {
      mpz_class c = a.terms[i].coeff + combine_b(b.terms[j].coeff);
      if (c != 0) r.terms.push_back({a.terms[i].key, std::move(c)});
      ++i;
      ++j;
    }
  }
  return r;
}

}  // namespace

ZPoly add(const ZPoly& a, const ZPoly& b) {
  return merge(a, b, [](const mpz_class& c) { return c; });
}

ZPoly sub(const ZPoly& a, const ZPoly& b) {
  return merge(a, b, [](const mpz_class& c) { return mpz_class(-c); });
}

ZPoly neg(ZPoly a) {
  for (auto& t : a.terms) t.coeff = -t.coeff;
  return a;
}

ZPoly scale(ZPoly a, const mpz_class& s) {
  if (s == 0) {
    a.terms.clear();
    return a;
  }
  for (auto& t : a.terms) t.coeff *= s;
  return a;
}

ZPoly mul(const ZPoly& a, const ZPoly& b) {
  ZPoly r(a.layout);
  if (a.is_zero() || b.is_zero()) return r;
  require(a.max_total_degree() + b.max_total_degree() <= a.layout.max_exponent(), Errc::ResourceLimit,
          "product degree exceeds packed exponent range");
  if (a.size() == 1 || b.size() == 1) {
    const ZPoly& single = a.size() == 1 ? a : b;
    const ZPoly& other = a.size() == 1 ? b : a;
    r.terms.reserve(other.size());
    for (const auto& t : other.terms) {
      r.terms.push_back({t.key + single.terms[0].key, t.coeff * single.terms[0].coeff});
    }
    return r;
  }
  std::unordered_map<std::uint64_t, std::size_t> slot;
  slot.reserve(std::min<std::size_t>(a.size() * b.size(), 1u << 22));
  std::vector<ZTerm> acc;
  for (const auto& ta : a.terms) {
    for (const auto& tb : b.terms) {
      const std::uint64_t key = ta.key + tb.key;
      auto [it, inserted] = slot.try_emplace(key, acc.size());
      if (inserted) {
        acc.push_back({key, 0});
        check_term_budget(acc.size(), "polynomial product");
      }
      mpz_addmul(acc[it->second].coeff.get_mpz_t(), ta.coeff.get_mpz_t(), tb.coeff.get_mpz_t());
    }
  }
  std::erase_if(acc, [](const ZTerm& t) { return t.coeff == 0; });
  std::sort(acc.begin(), acc.end(), [](const ZTerm& x, const ZTerm& y) { return x.key > y.key; });
  r.terms = std::move(acc);
  return r;
}

ZPoly mul_monomial(ZPoly a, std::uint64_t key) {
  for (auto& t : a.terms) t.key += key;
  return a;
}

ZPoly pow(const ZPoly& a, unsigned e) {
  ZPoly result = ZPoly::constant(a.layout, 1);
  ZPoly base = a;
  while (e > 0) {
    if (e & 1u) result = mul(result, base);
    e >>= 1u;
    if (e > 0) base = mul(base, base);
  }
  return result;
}

mpz_class content(const ZPoly& a) {
  mpz_class g = 0;
  for (const auto& t : a.terms) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), t.coeff.get_mpz_t());
    if (g == 1) break;
  }
  return g;
}

ZPoly divexact_scalar(ZPoly a, const mpz_class& d) {
  if (d == 1) return a;
  for (auto& t : a.terms) mpz_divexact(t.coeff.get_mpz_t(), t.coeff.get_mpz_t(), d.get_mpz_t());
  return a;
}

ZPoly positive_leading(ZPoly a) {
  if (!a.is_zero() && a.leading_coeff() < 0) a = neg(std::move(a));
  return a;
}

ZPoly primitive_part(const ZPoly& a) {
  if (a.is_zero()) return a;
  return positive_leading(divexact_scalar(a, content(a)));
}

std::optional<ZPoly> divide(const ZPoly& a, const ZPoly& b) {
  require(!b.is_zero(), Errc::DivisionByZero, "division by the zero polynomial");
  ZPoly q(a.layout);
  if (a.is_zero()) return q;
  const Layout& L = a.layout;
  const std::uint64_t lead_key = b.terms[0].key;
  const mpz_class& lead = b.terms[0].coeff;
  if (b.size() == 1) {
    for (const auto& t : a.terms) {
      if (!L.divides(lead_key, t.key) || !mpz_divisible_p(t.coeff.get_mpz_t(), lead.get_mpz_t())) return std::nullopt;
      mpz_class c;
      mpz_divexact(c.get_mpz_t(), t.coeff.get_mpz_t(), lead.get_mpz_t());
      q.terms.push_back({t.key - lead_key, std::move(c)});
    }
    return q;
  }
  if (a.max_total_degree() < b.max_total_degree()) return std::nullopt;
  std::map<std::uint64_t, mpz_class, std::greater<>> rem;
  for (const auto& t : a.terms) rem.emplace_hint(rem.end(), t.key, t.coeff);
  while (!rem.empty()) {
    auto lt = rem.begin();
    if (!L.divides(lead_key, lt->first)) return std::nullopt;
    if (!mpz_divisible_p(lt->second.get_mpz_t(), lead.get_mpz_t())) return std::nullopt;
    const std::uint64_t qkey = lt->first - lead_key;
    mpz_class qc;
    mpz_divexact(qc.get_mpz_t(), lt->second.get_mpz_t(), lead.get_mpz_t());
    rem.erase(lt);
    for (std::size_t j = 1; j < b.size(); ++j) {
      const std::uint64_t key = b.terms[j].key + qkey;
      auto [it, inserted] = rem.try_emplace(key, 0);
      mpz_submul(it->second.get_mpz_t(), qc.get_mpz_t(), b.terms[j].coeff.get_mpz_t());
      if (it->second == 0) rem.erase(it);
    }
    q.terms.push_back({qkey, std::move(qc)});
    check_term_budget(q.size(), "exact division");
    // Keys strictly below the smallest key reachable from q*b cannot cancel.
    if (!rem.empty() && rem.begin()->first < b.terms.back().key) return std::nullopt;
  }
  return q;
}

namespace {

// Horner over the variables of p; `terms` share exponents for vars < var.
ZPoly compose_rec(std::span<const ZTerm> terms, unsigned var, const Layout& pl, std::span<const ZPoly> comps) {
  const Layout& cl = comps[0].layout;
  if (var == pl.nvars) {
    mpz_class sum = 0;
    for (const auto& t : terms) sum += t.coeff;
    return ZPoly::constant(cl, sum);
  }
  ZPoly acc(cl);
  bool started = false;
  std::uint32_t prev = 0;
  std::size_t i = 0;
  while (i < terms.size()) {
    const std::uint32_t e = pl.exponent(terms[i].key, var);
    std::size_t j = i;
    while (j < terms.size() && pl.exponent(terms[j].key, var) == e) ++j;
    ZPoly inner = compose_rec(terms.subspan(i, j - i), var + 1, pl, comps);
    if (!started) {
      acc = std::move(inner);
      started = true;
    } else {
      for (std::uint32_t s = e; s < prev; ++s) acc = mul(acc, comps[var]);
      acc = add(acc, inner);
    }
    prev = e;
    i = j;
  }
  for (std::uint32_t s = 0; s < prev; ++s) acc = mul(acc, comps[var]);
  return acc;
}

}  // namespace

ZPoly compose(const ZPoly& p, std::span<const ZPoly> comps) {
  if (p.is_zero()) return ZPoly(comps[0].layout);
  return compose_rec(p.terms, 0, p.layout, comps);
}

ZPoly eval_var(const ZPoly& a, unsigned var, const mpz_class& value) {
  const Layout& L = a.layout;
  const unsigned deg = a.degree_in(var);
  std::vector<mpz_class> powers(deg + 1);
  powers[0] = 1;
  for (unsigned e = 1; e <= deg; ++e) powers[e] = powers[e - 1] * value;
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<ZTerm> acc;
  for (const auto& t : a.terms) {
    const std::uint64_t key = L.clear_var(t.key, var);
    auto [it, inserted] = slot.try_emplace(key, acc.size());
    if (inserted) acc.push_back({key, 0});
    mpz_addmul(acc[it->second].coeff.get_mpz_t(), t.coeff.get_mpz_t(), powers[L.exponent(t.key, var)].get_mpz_t());
  }
  ZPoly r(L);
  r.terms = std::move(acc);
  std::erase_if(r.terms, [](const ZTerm& t) { return t.coeff == 0; });
  std::sort(r.terms.begin(), r.terms.end(), [](const ZTerm& x, const ZTerm& y) { return x.key > y.key; });
  return r;
}

std::uint64_t monomial_content(const ZPoly& a) {
  const Layout& L = a.layout;
  std::uint64_t key = 0;
  for (unsigned v = 0; v < L.nvars; ++v) {
    std::uint32_t m = UINT32_MAX;
    for (const auto& t : a.terms) m = std::min(m, L.exponent(t.key, v));
    if (a.is_zero()) m = 0;
    key |= static_cast<std::uint64_t>(m) << L.shift(v);
  }
  return key;
}

ZPoly div_monomial(ZPoly a, std::uint64_t key) {
  for (auto& t : a.terms) t.key -= key;
  return a;
}

}  // namespace qasdyn::detail
