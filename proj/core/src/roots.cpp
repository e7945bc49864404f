#include "roots.hpp"

#include <cmath>
#include <numbers>

#include "qasdyn/error.hpp"

namespace qasdyn::detail {

void qp_trim(QPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

int qp_degree(const QPoly& p) { return static_cast<int>(p.size()) - 1; }

QPoly qp_derivative(const QPoly& p) {
  QPoly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  qp_trim(d);
  return d;
}

QPoly qp_sub(const QPoly& a, const QPoly& b) {
  QPoly r(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
  qp_trim(r);
  return r;
}

std::pair<QPoly, QPoly> qp_divmod(const QPoly& a, const QPoly& b) {
  require(!b.empty(), Errc::DivisionByZero, "polynomial division by zero");
  QPoly r = a;
  qp_trim(r);
  if (r.size() < b.size()) return {QPoly{}, r};
  QPoly q(r.size() - b.size() + 1);
  while (!r.empty() && r.size() >= b.size()) {
    const std::size_t shift = r.size() - b.size();
    const Rational c = r.back() / b.back();
    q[shift] = c;
    for (std::size_t i = 0; i < b.size(); ++i) r[i + shift] -= c * b[i];
    qp_trim(r);
  }
  qp_trim(q);
  return {q, r};
}

QPoly qp_gcd(QPoly a, QPoly b) {
  qp_trim(a);
  qp_trim(b);
  while (!b.empty()) {
    QPoly r = qp_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    const Rational lc = a.back();
    for (auto& c : a) c /= lc;
  }
  return a;
}

std::vector<std::pair<QPoly, unsigned>> squarefree_decomposition(const QPoly& p) {
  std::vector<std::pair<QPoly, unsigned>> out;
  require(qp_degree(p) >= 1, Errc::InvalidArgument, "squarefree decomposition of a constant");
  const QPoly dp = qp_derivative(p);
  const QPoly a0 = qp_gcd(p, dp);
  QPoly b = qp_divmod(p, a0).first;
  QPoly c = qp_divmod(dp, a0).first;
  QPoly d = qp_sub(c, qp_derivative(b));
  for (unsigned i = 1; qp_degree(b) >= 1; ++i) {
    QPoly a = qp_gcd(b, d);
    if (qp_degree(a) >= 1) out.emplace_back(a, i);
    b = qp_divmod(b, a).first;
    c = qp_divmod(d, a).first;
    d = qp_sub(c, qp_derivative(b));
  }
  for (auto& [f, m] : out) {
    const Rational lc = f.back();
    for (auto& x : f) x /= lc;
  }
  return out;
}

std::vector<CxB> to_complex(const QPoly& p, long prec) {
  std::vector<CxB> out;
  for (const auto& c : p) out.emplace_back(BigFloat(c, prec), BigFloat(0.0, prec));
  return out;
}

namespace {

// p(z) and p'(z) by Horner.
std::pair<CxB, CxB> horner(std::span<const CxB> a, const CxB& z, long prec) {
  const BigFloat zero(0.0, prec);
  CxB p = a.back();
  CxB dp(zero, zero);
  for (std::size_t i = a.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + a[i];
  }
  return {p, dp};
}

}  // namespace

RootSet aberth(std::span<const CxB> coeffs, long prec, const std::vector<CxB>* start) {
  require(coeffs.size() >= 2 && !(coeffs.back().re.is_zero() && coeffs.back().im.is_zero()), Errc::InvalidArgument,
          "aberth needs a nonconstant polynomial with nonzero leading coefficient");
  const std::size_t n = coeffs.size() - 1;
  std::vector<CxB> a;
  for (const auto& c : coeffs) a.emplace_back(c.re.with_precision(prec), c.im.with_precision(prec));
  const BigFloat zero(0.0, prec);
  RootSet rs;
  rs.precision = prec;
  if (n == 1) {
    rs.roots.push_back(-(a[0] / a[1]));
    rs.radii.push_back(zero);
    return rs;
  }

  std::vector<CxB> z;
  if (start && start->size() == n) {
    for (const auto& s : *start) z.emplace_back(s.re.with_precision(prec), s.im.with_precision(prec));
  } else {
    // Points on a circle of radius bounded by the Cauchy bound, rotated off the axes.
    const double lead = a.back().modulus().to_double();
    double bound = 0;
    for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, a[i].modulus().to_double() / lead);
    const double r0 = std::max(0.5 * (1.0 + bound), 1e-3);
    for (std::size_t k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
      z.push_back(make_cx<BigFloat>(r0 * std::cos(th), r0 * std::sin(th), prec));
    }
  }

  const BigFloat tol = ldexp_one(-(prec - 8), prec);
  const BigFloat one(1.0, prec);
  const int max_iter = 200 + static_cast<int>(prec);
  for (int it = 0; it < max_iter; ++it) {
    BigFloat worst = zero;
    for (std::size_t i = 0; i < n; ++i) {
      auto [p, dp] = horner(a, z[i], prec);
      if (p.re.is_zero() && p.im.is_zero()) continue;
      CxB s(zero, zero);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) s += CxB(one, zero) / (z[i] - z[j]);
      }
      const CxB ratio = p / dp;
      const CxB w = ratio / (CxB(one, zero) - ratio * s);
      if (!w.re.is_finite() || !w.im.is_finite()) continue;
      z[i] -= w;
      const BigFloat scale = max(one, z[i].modulus());
      worst = max(worst, w.modulus() / scale);
    }
    if (worst < tol) break;
  }

  // Weierstrass corrections give inclusion disks of radius n * |W_i|.
  rs.roots = z;
  for (std::size_t i = 0; i < n; ++i) {
    CxB den = a.back();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) den *= (z[i] - z[j]);
    }
    auto [p, dp] = horner(a, z[i], prec);
    const BigFloat w = (p.re.is_zero() && p.im.is_zero()) ? zero : (p / den).modulus();
    // Factor 2 and the additive term absorb rounding in the evaluation itself.
    const BigFloat slack = ldexp_one(-(prec - 4), prec) * max(one, z[i].modulus());
    rs.radii.push_back(BigFloat(2.0 * static_cast<double>(n), prec) * w + slack);
  }
  return rs;
}

RootSet certified_roots(const std::function<std::vector<CxB>(long)>& coeffs_at, long start_prec, long target_bits,
                        long max_prec) {
  std::vector<CxB> seed;
  for (long prec = start_prec; prec <= max_prec; prec *= 2) {
    const auto coeffs = coeffs_at(prec);
    RootSet rs = aberth(coeffs, prec, seed.empty() ? nullptr : &seed);
    const BigFloat target = ldexp_one(-target_bits, prec);
    bool ok = true;
    for (std::size_t i = 0; ok && i < rs.roots.size(); ++i) {
      if (!(rs.radii[i] < target)) ok = false;
      for (std::size_t j = i + 1; ok && j < rs.roots.size(); ++j) {
        if (!((rs.roots[i] - rs.roots[j]).modulus() > rs.radii[i] + rs.radii[j])) ok = false;
      }
    }
    if (ok) return rs;
    seed = rs.roots;
  }
  raise(Errc::PrecisionExhausted, "roots not separated below 2^-" + std::to_string(target_bits) + " at " +
                                      std::to_string(max_prec) + " bits");
}

}  // namespace qasdyn::detail
