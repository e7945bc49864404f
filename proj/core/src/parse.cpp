// Recursive-descent parser and canonical printer for polynomial text.

#include <cctype>
#include <map>
#include <sstream>
#include <string>

#include "qasdyn/error.hpp"
#include "qasdyn/polycore.hpp"

namespace qasdyn {

namespace {

constexpr std::uint32_t kMaxParsedExponent = 1u << 20;

// Intermediate values may be inhomogeneous; homogeneity is checked on the result.
using Sparse = std::map<std::vector<std::uint32_t>, Rational>;

void add_into(Sparse& acc, const Sparse& b, int sign) {
  for (const auto& [m, c] : b) {
    auto [it, inserted] = acc.try_emplace(m, 0);
    if (sign > 0) {
      it->second += c;
    } else {
      it->second -= c;
    }
    if (it->second == 0) acc.erase(it);
  }
}

Sparse mul(const Sparse& a, const Sparse& b) {
  if (a.size() * b.size() > term_cap()) raise(Errc::ResourceLimit, "parsed product exceeds the term cap");
  Sparse r;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) {
      std::vector<std::uint32_t> m(ma.size());
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
      auto [it, inserted] = r.try_emplace(std::move(m), 0);
      it->second += ca * cb;
      if (it->second == 0) r.erase(it);
    }
  }
  return r;
}

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars) : text_(text), vars_(vars) {}

  Sparse parse() {
    Sparse r = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return r;
  }

 private:
  std::string_view text_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    raise(Errc::SyntaxError, what + " at offset " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Sparse constant(const Rational& c) const {
    Sparse s;
    if (c != 0) s.emplace(std::vector<std::uint32_t>(vars_.size(), 0), c);
    return s;
  }

  Sparse expr() {
    Sparse acc;
    int sign = accept('-') ? -1 : 1;
    while (true) {
      add_into(acc, term(), sign);
      if (accept('+')) {
        sign = 1;
      } else if (accept('-')) {
        sign = -1;
      } else {
        return acc;
      }
    }
  }

  Sparse term() {
    Sparse acc = factor();
    while (accept('*')) acc = mul(acc, factor());
    return acc;
  }

  std::string digits() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected digits");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::uint32_t exponent() {
    const std::string d = digits();
    if (d.size() > 7 || std::stoul(d) > kMaxParsedExponent) fail("exponent too large");
    return static_cast<std::uint32_t>(std::stoul(d));
  }

  Sparse power(Sparse base, std::uint32_t e) const {
    Sparse r = constant(1);
    while (e > 0) {
      if (e & 1u) r = mul(r, base);
      e >>= 1u;
      if (e > 0) base = mul(base, base);
    }
    return r;
  }

  Sparse factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Sparse inner = expr();
      if (!accept(')')) fail("expected ')'");
      if (accept('^')) inner = power(std::move(inner), exponent());
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      Integer num(digits());
      Integer den = 1;
      if (accept('/')) {
        den = Integer(digits());
        if (den == 0) fail("zero denominator");
      }
      Rational q(num, den);
      q.canonicalize();
      return constant(q);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      std::size_t idx = vars_.size();
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) idx = i;
      }
      if (idx == vars_.size()) raise(Errc::UnknownVariable, "unknown variable '" + name + "'");
      std::uint32_t e = 1;
      if (accept('^')) e = exponent();
      std::vector<std::uint32_t> m(vars_.size(), 0);
      m[idx] = e;
      Sparse s;
      s.emplace(std::move(m), Rational(1));
      return s;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

HomPoly parse_poly(std::string_view text, std::span<const std::string> vars) {
  require(!vars.empty(), Errc::InvalidArgument, "no variables given");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    for (std::size_t j = i + 1; j < vars.size(); ++j) {
      require(vars[i] != vars[j], Errc::InvalidArgument, "duplicate variable name '" + vars[i] + "'");
    }
  }
  Sparse s = Parser(text, vars).parse();
  std::vector<Term> terms;
  terms.reserve(s.size());
  for (auto& [m, c] : s) terms.push_back({Monomial(m), c});
  return HomPoly::from_terms(vars.size(), std::move(terms));
}

std::string to_string(const HomPoly& p, std::span<const std::string> vars) {
  require(vars.size() == p.nvars(), Errc::ArityMismatch, "printer: wrong number of variable names");
  if (p.is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (const auto& t : p.terms()) {
    const bool negative = t.coeff < 0;
    if (first) {
      if (negative) out << '-';
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;
    const Rational mag = abs(t.coeff);
    bool need_star = false;
    if (mag != 1 || t.monomial.degree() == 0) {
      out << mag.get_str();
      need_star = true;
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      const std::uint32_t e = t.monomial[v];
      if (e == 0) continue;
      if (need_star) out << '*';
      out << vars[v];
      if (e > 1) out << '^' << e;
      need_star = true;
    }
  }
  return out.str();
}

}  // namespace qasdyn
