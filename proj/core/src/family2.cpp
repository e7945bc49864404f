#include "qasdyn/family2.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "qasdyn/error.hpp"
#include "qasdyn/rng.hpp"
#include "roots.hpp"
#include "textfile.hpp"

namespace qasdyn {

namespace {

using detail::CxB;
using detail::QPoly;
using Mat3 = std::array<std::array<long, 3>, 3>;

constexpr std::size_t kMaxCharts = 32;
constexpr int kMaxFamilyAttempts = 200;
constexpr long kPencilBound = 1000;

const Rational kOnes[3] = {1, 1, 1};

Rational at_ones(const HomPoly& p) { return eval(p, kOnes); }

HomPoly substitute(const HomPoly& p, const Mat3& m) {
  Lifting subs;
  for (std::size_t i = 0; i < 3; ++i) {
    HomPoly row = HomPoly::zero(3);
    for (std::size_t j = 0; j < 3; ++j) {
      if (m[i][j] != 0) row = row + Rational(m[i][j]) * HomPoly::variable(3, j);
    }
    subs.push_back(row);
  }
  return compose(p, subs);
}

// p(z, w, 1) as a polynomial in w, coefficients evaluated at z.
template <class T, class Pow>
std::vector<T> w_coeffs(const HomPoly& p, const T& zero, Pow&& zpow) {
  std::vector<T> c(p.degree() + 1, zero);
  for (const auto& term : p.terms()) c[term.monomial[1]] += zpow(term.monomial[0], term.coeff);
  return c;
}

Rational det_q(std::vector<std::vector<Rational>> a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      const Rational f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return det;
}

Rational sylvester_det(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  const std::size_t m = a.size() - 1;
  const std::size_t n = b.size() - 1;
  std::vector<std::vector<Rational>> s(m + n, std::vector<Rational>(m + n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) s[i][i + j] = a[m - j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) s[n + i][i + j] = b[n - j];
  }
  return det_q(std::move(s));
}

// Newton interpolation through (k, y_k), k = 0 .. y.size()-1.
QPoly interpolate(const std::vector<Rational>& y) {
  const std::size_t n = y.size();
  std::vector<Rational> dd = y;
  for (std::size_t lvl = 1; lvl < n; ++lvl) {
    for (std::size_t i = n - 1; i >= lvl; --i) dd[i] = (dd[i] - dd[i - 1]) / Rational(static_cast<long>(lvl));
  }
  QPoly out{dd[n - 1]};
  for (std::size_t i = n - 1; i-- > 0;) {
    // out = out * (x - i) + dd[i]
    QPoly next(out.size() + 1, 0);
    for (std::size_t j = 0; j < out.size(); ++j) {
      next[j + 1] += out[j];
      next[j] -= out[j] * static_cast<long>(i);
    }
    next[0] += dd[i];
    out = std::move(next);
  }
  detail::qp_trim(out);
  return out;
}

// Res_w(P(z,w,1), R(z,w,1)) as a polynomial in z.
QPoly resultant_in_z(const HomPoly& p, const HomPoly& r) {
  const std::size_t deg = static_cast<std::size_t>(p.degree()) * r.degree();
  std::vector<Rational> vals;
  for (std::size_t k = 0; k <= deg; ++k) {
    const Rational z(static_cast<long>(k));
    auto zpow = [&](std::uint32_t e, const Rational& c) {
      Rational v = c;
      for (std::uint32_t i = 0; i < e; ++i) v *= z;
      return v;
    };
    vals.push_back(sylvester_det(w_coeffs(p, Rational(0), zpow), w_coeffs(r, Rational(0), zpow)));
  }
  return interpolate(vals);
}

BigFloat coeff_sum(const HomPoly& p, long prec) {
  BigFloat s(0.0, prec);
  for (const auto& t : p.terms()) s += abs(BigFloat(t.coeff, prec));
  return s;
}

// Certified nonvanishing of d on the polydisk of radius delta around x.
bool certified_nonzero(const HomPoly& d, const std::array<CxB, 3>& x, const BigFloat& delta, long prec) {
  if (d.is_zero()) return false;
  const CxB v = eval(d, std::span<const CxB>(x.data(), 3), prec);
  BigFloat hi(0.0, prec), lo(0.0, prec);
  std::array<BigFloat, 3> mod{x[0].modulus(), x[1].modulus(), x[2].modulus()};
  for (const auto& t : d.terms()) {
    BigFloat a = abs(BigFloat(t.coeff, prec));
    BigFloat b = a;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::uint32_t e = 0; e < t.monomial[i]; ++e) {
        a *= mod[i] + delta;
        b *= mod[i];
      }
    }
    hi += a;
    lo += b;
  }
  const BigFloat bound = (hi - lo) + ldexp_one(-(prec - 16), prec) * hi;
  return v.modulus() > bound;
}

std::optional<Rational> recognize(const BigFloat& x, long prec) {
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), x.get());
  // Continued fraction convergents with bounded denominator.
  const Integer max_den = Integer(1) << static_cast<unsigned long>(std::min<long>(prec / 6, 48));
  Integer h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  mpq_class rest = q;
  std::optional<Rational> best;
  for (int it = 0; it < 200; ++it) {
    Integer a;
    mpz_fdiv_q(a.get_mpz_t(), rest.get_num_mpz_t(), rest.get_den_mpz_t());
    const Integer h2 = a * h1 + h0;
    const Integer k2 = a * k1 + k0;
    if (k2 > max_den) break;
    best = Rational(h2, k2);
    best->canonicalize();
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    rest -= a;
    if (rest == 0) break;
    rest = 1 / rest;
  }
  if (!best) return std::nullopt;
  if (!(abs(BigFloat(*best, prec) - x) < ldexp_one(-(prec / 3), prec))) return std::nullopt;
  return best;
}

std::optional<std::array<Rational, 3>> recognize_point(const std::array<CxB, 3>& x, const HomPoly& p,
                                                       const HomPoly& r, long prec) {
  std::array<Rational, 3> q;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(abs(x[i].im) < ldexp_one(-(prec / 3), prec))) return std::nullopt;
    auto v = recognize(x[i].re, prec);
    if (!v) return std::nullopt;
    q[i] = *v;
  }
  if (eval(p, q) != 0 || eval(r, q) != 0) return std::nullopt;
  return q;
}

bool usable_chart(const HomPoly& p, const HomPoly& r) {
  const Rational e1[3] = {0, 1, 0};
  if (eval(p, e1) == 0 || eval(r, e1) == 0) return false;
  // No common zeros on the line t = 0.
  const HomPoly t0 = HomPoly::zero(3);
  const Lifting at_inf{HomPoly::variable(3, 0), HomPoly::variable(3, 1), t0};
  const HomPoly g = gcd(compose(p, at_inf), compose(r, at_inf));
  return g.is_constant();
}

Mat3 random_chart(Rng& rng) {
  for (;;) {
    Mat3 m;
    for (auto& row : m) {
      for (auto& v : row) v = rng.range(-3, 3);
    }
    const long det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (det != 0) return m;
  }
}

CxB horner_cx(const std::vector<CxB>& c, const CxB& x) {
  CxB acc = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) acc = acc * x + c[i];
  return acc;
}

// Common zeros of P and R in P^2, via a random chart and a resultant in that chart.
std::vector<CommonZero> common_zeros(const HomPoly& P, const HomPoly& R, long prec) {
  Rng rng(0x5eedc0de);
  for (std::size_t attempt = 0; attempt < kMaxCharts; ++attempt) {
    const Mat3 m = random_chart(rng);
    const HomPoly p = substitute(P, m);
    const HomPoly r = substitute(R, m);
    if (!usable_chart(p, r)) continue;

    const QPoly res = resultant_in_z(p, r);
    require(detail::qp_degree(res) == static_cast<int>(P.degree() * R.degree()), Errc::InternalInvariant,
            "resultant degree does not match the Bezout number");
    const BigFloat zero(0.0, prec);
    const BigFloat tol = ldexp_one(-(prec / 4), prec);
    long mnorm = 0;
    for (const auto& row : m) mnorm = std::max(mnorm, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));

    std::vector<CommonZero> out;
    for (const auto& [factor, mult] : detail::squarefree_decomposition(res)) {
      const detail::RootSet zs = detail::certified_roots(
          [&f = factor](long pr) { return detail::to_complex(f, pr); }, prec, prec / 2, 8 * prec);
      for (std::size_t iz = 0; iz < zs.roots.size(); ++iz) {
        const CxB z0(zs.roots[iz].re.with_precision(prec), zs.roots[iz].im.with_precision(prec));
        auto zpow = [&](std::uint32_t e, const Rational& c) {
          CxB v(BigFloat(c, prec), zero);
          for (std::uint32_t i = 0; i < e; ++i) v *= z0;
          return v;
        };
        const std::vector<CxB> pc = w_coeffs(p, CxB(zero, zero), zpow);
        const std::vector<CxB> rc = w_coeffs(r, CxB(zero, zero), zpow);
        const detail::RootSet ws = detail::aberth(pc, prec);
        for (std::size_t iw = 0; iw < ws.roots.size(); ++iw) {
          const CxB& w0 = ws.roots[iw];
          BigFloat scale = max(BigFloat(1.0, prec), max(z0.modulus(), w0.modulus()));
          BigFloat mag = coeff_sum(R, prec);
          for (std::uint32_t e = 0; e < R.degree(); ++e) mag *= scale;
          if (!(horner_cx(rc, w0).modulus() <= tol * mag)) continue;

          std::array<CxB, 3> x{CxB(zero, zero), CxB(zero, zero), CxB(zero, zero)};
          const CxB chart[3] = {z0, w0, CxB(BigFloat(1.0, prec), zero)};
          for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) x[i] += BigFloat(m[i][j], prec) * chart[j];
          }
          std::size_t big = 0;
          for (std::size_t i = 1; i < 3; ++i) {
            if (x[i].modulus() > x[big].modulus()) big = i;
          }
          const CxB piv = x[big];
          const BigFloat piv_mod = piv.modulus();
          for (auto& c : x) c = c / piv;
          x[big] = CxB(BigFloat(1.0, prec), zero);

          CommonZero cz{x, (zs.radii[iz] + ws.radii[iw]) * BigFloat(4L * mnorm, prec) / piv_mod, std::nullopt};
          cz.radius = max(cz.radius, ldexp_one(-(prec / 2), prec));
          bool dup = false;
          for (const auto& o : out) {
            BigFloat dist = zero;
            for (std::size_t i = 0; i < 3; ++i) dist = max(dist, (o.point[i] - x[i]).modulus());
            if (dist < tol) dup = true;
          }
          if (dup) continue;
          cz.exact = recognize_point(x, P, R, prec);
          out.push_back(std::move(cz));
        }
      }
    }
    require(!out.empty(), Errc::PrecisionExhausted, "no common zero matched the resultant roots");
    return out;
  }
  raise(Errc::InternalInvariant, "no usable affine chart for the common zeros of P and R");
}

Verdict combine(std::initializer_list<Verdict> vs) {
  bool unknown = false;
  for (Verdict v : vs) {
    if (v == Verdict::Fail) return Verdict::Fail;
    if (v == Verdict::Unknown) unknown = true;
  }
  return unknown ? Verdict::Unknown : Verdict::Pass;
}

unsigned rank_q(std::array<std::array<Rational, 3>, 3> a) {
  unsigned rank = 0;
  for (std::size_t col = 0; col < 3 && rank < 3; ++col) {
    std::size_t piv = rank;
    while (piv < 3 && a[piv][col] == 0) ++piv;
    if (piv == 3) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t r = rank + 1; r < 3; ++r) {
      const Rational f = a[r][col] / a[rank][col];
      for (std::size_t c = col; c < 3; ++c) a[r][c] -= f * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

HomPoly random_dense(unsigned deg, unsigned bound, Rng& rng) {
  std::vector<Term> terms;
  for (unsigned a = 0; a <= deg; ++a) {
    for (unsigned b = 0; a + b <= deg; ++b) {
      const long c = rng.range(-static_cast<long>(bound), static_cast<long>(bound));
      if (c != 0) terms.push_back({Monomial({a, b, deg - a - b}), Rational(c)});
    }
  }
  if (terms.empty()) return HomPoly::zero(3);
  return HomPoly::from_terms(3, std::move(terms));
}

HomPoly t_power(unsigned deg) { return HomPoly::monomial(Monomial({0, 0, deg}), 1); }

}  // namespace

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

Lifting FamilyInstance::raw_components() const { return {P * Q1 - R, P * Q2 - R, P * Q3 - R}; }

FamilyInstance build_family_map(HomPoly P, HomPoly Q1, HomPoly Q2, HomPoly Q3, HomPoly R,
                                std::vector<std::string> vars) {
  for (const HomPoly* p : {&P, &Q1, &Q2, &Q3, &R}) {
    require(p->nvars() == 3, Errc::ArityMismatch, "family polynomials must be in 3 variables");
  }
  if (vars.empty()) vars = default_var_names(3);
  require(vars.size() == 3, Errc::ArityMismatch, "family needs 3 variable names");
  require(!P.is_zero() && !P.is_constant(), Errc::DegreeConstraintViolated, "P must be nonconstant");
  require(!Q1.is_zero() && !Q2.is_zero() && !Q3.is_zero(), Errc::DegreeConstraintViolated, "Q_j must be nonzero");
  require(Q1.degree() == Q2.degree() && Q1.degree() == Q3.degree(), Errc::DegreeConstraintViolated,
          "deg Q1, deg Q2, deg Q3 differ");
  require(!R.is_zero(), Errc::NormalizationViolated, "R(1,1,1) must be nonzero");
  require(R.degree() == P.degree() + Q1.degree(), Errc::DegreeConstraintViolated,
          "deg R = " + std::to_string(R.degree()) + " but deg P + deg Q1 = " + std::to_string(P.degree() + Q1.degree()));

  const Rational r1 = at_ones(R);
  require(r1 != 0, Errc::NormalizationViolated, "R(1,1,1) must be nonzero");
  const Rational p1 = at_ones(P);
  for (const HomPoly* q : {&Q1, &Q2, &Q3}) {
    const Rational lhs = p1 * at_ones(*q);
    require(lhs == r1, Errc::NormalizationViolated,
            "P(1,1,1) Q_j(1,1,1) = " + lhs.get_str() + " differs from R(1,1,1) = " + r1.get_str());
  }

  FamilyInstance inst;
  inst.P = std::move(P);
  inst.Q1 = std::move(Q1);
  inst.Q2 = std::move(Q2);
  inst.Q3 = std::move(Q3);
  inst.R = std::move(R);
  inst.vars = vars;
  Lifting comps = inst.raw_components();
  const HomPoly g = gcd(comps);
  require(g.is_constant(), Errc::CommonFactor, "components share the factor " + to_string(g, vars));
  inst.map = make_map(std::move(comps), std::move(vars));
  inst.spec = {inst.P.degree() + inst.Q1.degree(), inst.P.degree(), 1};
  return inst;
}

Cor1Result check_cor1(const FamilyInstance& inst) {
  Cor1Result out;
  const HomPoly a = inst.Q2 - inst.Q1;
  const HomPoly b = inst.Q3 - inst.Q1;
  out.q_gcd = (a.is_zero() || b.is_zero()) ? HomPoly::zero(3) : gcd(a, b);
  out.pr_gcd = gcd(inst.P, inst.R);
  const bool ok = !out.q_gcd.is_zero() && out.q_gcd.is_constant() && out.pr_gcd.is_constant();
  out.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return out;
}

Cor2Result check_cor2(const FamilyInstance& inst, long precision_bits) {
  require(precision_bits >= 64, Errc::InvalidArgument, "precision must be at least 64 bits");
  const long prec = precision_bits;
  Cor2Result out;
  const Cor1Result c1 = check_cor1(inst);
  out.finiteness = (!c1.q_gcd.is_zero() && c1.q_gcd.is_constant()) ? Verdict::Pass : Verdict::Fail;
  if (!c1.pr_gcd.is_constant()) {
    out.surrogate = Verdict::Fail;
    out.verdict = Verdict::Fail;
    out.detail = "P and R share a factor; their common zero set is a curve";
    return out;
  }

  try {
    out.zeros = common_zeros(inst.P, inst.R, prec);
  } catch (const Error& e) {
    if (e.code() != Errc::PrecisionExhausted) throw;
    out.surrogate = Verdict::Unknown;
    out.verdict = combine({out.finiteness, out.surrogate});
    out.precision_hint = 2 * prec;
    out.detail = e.what();
    return out;
  }

  const HomPoly d1 = inst.Q1 - inst.Q3;
  const HomPoly d2 = inst.Q2 - inst.Q3;
  out.surrogate = Verdict::Pass;
  for (std::size_t i = 0; i < out.zeros.size(); ++i) {
    const CommonZero& z = out.zeros[i];
    Verdict v;
    if (z.exact) {
      v = (eval(d1, *z.exact) == 0 && eval(d2, *z.exact) == 0) ? Verdict::Fail : Verdict::Pass;
    } else {
      v = (certified_nonzero(d1, z.point, z.radius, prec) || certified_nonzero(d2, z.point, z.radius, prec))
              ? Verdict::Pass
              : Verdict::Unknown;
    }
    if (v == Verdict::Fail) {
      out.surrogate = Verdict::Fail;
      out.witness = i;
      break;
    }
    if (v == Verdict::Unknown && out.surrogate == Verdict::Pass) {
      out.surrogate = Verdict::Unknown;
      out.witness = i;
    }
  }
  out.verdict = combine({out.finiteness, out.surrogate});
  if (out.surrogate == Verdict::Unknown) {
    out.precision_hint = 2 * prec;
    out.detail = "Q1 - Q3 and Q2 - Q3 are not separated from 0 at an irrational common zero of P and R";
  } else if (out.surrogate == Verdict::Fail) {
    out.detail = "Q1 - Q3 and Q2 - Q3 both vanish at a common zero of P and R";
  }
  return out;
}

Cor3Result check_cor3(const FamilyInstance& inst, std::size_t samples, std::uint64_t seed) {
  Cor3Result out;
  const Lifting comps = inst.raw_components();
  for (std::size_t j = 0; j < 3; ++j) {
    Rational row_sum = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      out.jacobian[j][i] = eval(partial(comps[j], i), kOnes);
      row_sum += out.jacobian[j][i];
    }
    // Euler: row . (1,1,1) = deg * (P Q_j - R)(1,1,1) = 0.
    require(row_sum == 0, Errc::InternalInvariant, "Jacobian row is not orthogonal to (1,1,1)");
  }
  out.rank = rank_q(out.jacobian);
  require(out.rank <= 2, Errc::InternalInvariant, "Jacobian rank exceeds 2 at (1,1,1)");
  out.rank_verdict = out.rank == 2 ? Verdict::Pass : Verdict::Fail;

  std::vector<std::array<long, 3>> triples{{1, -1, 0}, {1, 0, -1}, {0, 1, -1}};
  Rng rng(seed);
  while (triples.size() < samples + 3) {
    const long a = rng.range(-kPencilBound, kPencilBound);
    const long b = rng.range(-kPencilBound, kPencilBound);
    if (a == 0 && b == 0) continue;
    triples.push_back({a, b, -a - b});
  }
  out.pencil = Verdict::Pass;
  for (const auto& [a, b, c] : triples) {
    ++out.triples_tested;
    const HomPoly l = Rational(a) * inst.Q1 + Rational(b) * inst.Q2 + Rational(c) * inst.Q3;
    if (l.is_zero() || !gcd(inst.P, l).is_constant()) {
      out.pencil = Verdict::Fail;
      out.pencil_randomized = false;
      out.pencil_witness = std::array<Integer, 3>{a, b, c};
      break;
    }
  }
  return out;
}

PreflightReport preflight(const FamilyInstance& inst, long precision_bits, std::size_t samples, std::uint64_t seed) {
  PreflightReport rep;
  rep.cor1 = check_cor1(inst);
  rep.cor2 = check_cor2(inst, precision_bits);
  rep.cor3 = check_cor3(inst, samples, seed);
  rep.overall = combine({rep.cor1.verdict, rep.cor2.verdict, rep.cor3.rank_verdict, rep.cor3.pencil});
  return rep;
}

FamilyInstance random_family(unsigned deg_p, unsigned deg_q, unsigned coeff_bound, std::uint64_t seed) {
  require(deg_p >= 1, Errc::InvalidArgument, "deg_p must be at least 1");
  require(deg_q >= 2, Errc::InvalidArgument,
          "deg_q must be at least 2: with deg_q = 1 the characteristic polynomial has P(1) = 0 and lambda = 1");
  require(coeff_bound >= 1, Errc::InvalidArgument, "coeff_bound must be at least 1");
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxFamilyAttempts; ++attempt) {
    HomPoly P = random_dense(deg_p, coeff_bound, rng);
    HomPoly Q1 = random_dense(deg_q, coeff_bound, rng);
    HomPoly Q2 = random_dense(deg_q, coeff_bound, rng);
    HomPoly Q3 = random_dense(deg_q, coeff_bound, rng);
    HomPoly R = random_dense(deg_p + deg_q, coeff_bound, rng);
    if (P.is_zero() || Q1.is_zero()) continue;
    const Rational p1 = at_ones(P);
    const Rational q1 = at_ones(Q1);
    if (p1 == 0 || q1 == 0) continue;
    Q2 = Q2 + Rational(q1 - at_ones(Q2)) * t_power(deg_q);
    Q3 = Q3 + Rational(q1 - at_ones(Q3)) * t_power(deg_q);
    R = R + Rational(p1 * q1 - at_ones(R)) * t_power(deg_p + deg_q);
    if (Q2.is_zero() || Q3.is_zero() || R.is_zero()) continue;
    try {
      FamilyInstance inst = build_family_map(P, Q1, Q2, Q3, R);
      if (check_cor1(inst).verdict == Verdict::Pass) return inst;
    } catch (const Error& e) {
      if (e.code() != Errc::CommonFactor && e.code() != Errc::NotDominant &&
          e.code() != Errc::DegreeConstraintViolated && e.code() != Errc::NormalizationViolated) {
        throw;
      }
    }
  }
  raise(Errc::GenerationExhausted,
        "no admissible instance after " + std::to_string(kMaxFamilyAttempts) + " attempts");
}

FamilyInstance parse_family_file(std::string_view text) {
  std::vector<std::string> vars;
  std::map<std::string, std::string> polys;
  std::vector<std::string> maps;
  for (const auto& line : detail::read_keyed_lines(text)) {
    const std::string where = "line " + std::to_string(line.line_no) + ": ";
    if (line.key == "vars") {
      require(vars.empty(), Errc::InputFormat, where + "duplicate 'vars' line");
      vars = detail::split_words(line.payload);
      require(vars.size() == 3, Errc::InputFormat, where + "a family needs exactly 3 variables");
    } else if (line.key == "P" || line.key == "Q1" || line.key == "Q2" || line.key == "Q3" || line.key == "R") {
      require(!vars.empty(), Errc::InputFormat, where + "'" + line.key + "' before 'vars'");
      require(polys.emplace(line.key, line.payload).second, Errc::InputFormat, where + "duplicate '" + line.key + "'");
    } else if (line.key == "map") {
      require(!vars.empty(), Errc::InputFormat, where + "'map' before 'vars'");
      maps.push_back(line.payload);
    } else {
      raise(Errc::InputFormat, where + "unknown keyword '" + line.key + "'");
    }
  }
  require(!vars.empty(), Errc::InputFormat, "missing 'vars' line");
  for (const char* key : {"P", "Q1", "Q2", "Q3", "R"}) {
    require(polys.count(key) == 1, Errc::InputFormat, std::string("missing '") + key + "' line");
  }
  auto get = [&](const char* key) { return parse_poly(polys.at(key), vars); };
  FamilyInstance inst = build_family_map(get("P"), get("Q1"), get("Q2"), get("Q3"), get("R"), vars);
  if (!maps.empty()) {
    require(maps.size() == 3, Errc::InputFormat, "expected 3 'map' lines, found " + std::to_string(maps.size()));
    Lifting given;
    for (const auto& m : maps) given.push_back(parse_poly(m, vars));
    require(make_map(std::move(given), vars).components == inst.map.components, Errc::InputFormat,
            "'map' lines disagree with the map induced by P, Q1, Q2, Q3, R");
  }
  return inst;
}

std::string format_family_file(const FamilyInstance& inst) {
  std::ostringstream out;
  out << format_map_file(inst.map);
  out << "P " << to_string(inst.P, inst.vars) << '\n';
  out << "Q1 " << to_string(inst.Q1, inst.vars) << '\n';
  out << "Q2 " << to_string(inst.Q2, inst.vars) << '\n';
  out << "Q3 " << to_string(inst.Q3, inst.vars) << '\n';
  out << "R " << to_string(inst.R, inst.vars) << '\n';
  return out.str();
}

}  // namespace qasdyn
