#include "qasdyn/specdeg.hpp"

#include <algorithm>
#include <cmath>

#include "qasdyn/error.hpp"
#include "roots.hpp"

namespace qasdyn {

namespace {

constexpr std::size_t kMaxFitIndex = 20000;

BigFloat zero_at(long prec) { return BigFloat(0.0, prec); }

void require_recurrence(const std::vector<Integer>& degrees, const RecurrenceSpec& spec) {
  const auto expect = extend_degrees(spec, degrees.size() - 1);
  require(expect == degrees, Errc::InvalidArgument, "degree sequence does not follow the report's recurrence");
}

BigFloat eval_real(const std::vector<Integer>& coeffs, const BigFloat& x) {
  const long prec = x.precision();
  BigFloat acc = zero_at(prec);
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + BigFloat(coeffs[i], prec);
  return acc;
}

// Q(n) coefficients from the tail d_n lambda^-n at r consecutive indices.
std::vector<BigFloat> fit_tail(const RecurrenceSpec& spec, const BigFloat& lambda, unsigned r, const BigFloat& rho) {
  const long prec = lambda.precision();
  std::size_t n_fit = spec.n0 + 4;
  if (!rho.is_zero()) {
    const double lr = -std::log(rho.to_double());
    const double need = (static_cast<double>(prec) * std::log(2.0) + 4.0 * std::log(static_cast<double>(prec))) / lr;
    n_fit = std::max(n_fit, static_cast<std::size_t>(need) + 8);
  }
  n_fit = std::min(n_fit, kMaxFitIndex);
  const auto degs = extend_degrees(spec, n_fit);
  const BigFloat lam_n1 = pow(lambda, static_cast<long>(n_fit - 1));
  const BigFloat y1 = BigFloat(degs[n_fit - 1], prec) / lam_n1;
  if (r == 1) return {y1};
  const BigFloat y2 = BigFloat(degs[n_fit], prec) / (lam_n1 * lambda);
  // y = c0 + c1 n at n_fit - 1 and n_fit.
  const BigFloat c1 = y2 - y1;
  const BigFloat c0 = y1 - c1 * BigFloat(static_cast<long>(n_fit - 1), prec);
  return {c0, c1};
}

BigFloat q_at(const std::vector<BigFloat>& q, std::size_t n, long prec) {
  BigFloat acc = zero_at(prec);
  const BigFloat x(static_cast<long>(n), prec);
  for (std::size_t i = q.size(); i-- > 0;) acc = acc * x + q[i];
  return acc;
}

}  // namespace

void RecurrenceSpec::validate() const {
  require(d >= 2, Errc::InvalidArgument, "recurrence needs d >= 2");
  require(n0 >= 1, Errc::InvalidArgument, "recurrence needs n0 >= 1");
}

std::vector<Integer> extend_degrees(const RecurrenceSpec& spec, std::size_t n) {
  spec.validate();
  std::vector<Integer> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    if (i == 0) {
      out.emplace_back(1);
      continue;
    }
    Integer v = Integer(spec.d) * out[i - 1];
    if (i >= spec.n0 + 1) v -= Integer(spec.h) * out[i - spec.n0 - 1];
    if (v <= 0) {
      raise(Errc::NonPositiveDegree, "d_" + std::to_string(i) + " = " + v.get_str() + " is not positive");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Integer> char_poly(const RecurrenceSpec& spec) {
  spec.validate();
  std::vector<Integer> c(spec.n0 + 2, 0);
  c[0] = spec.h;
  c[spec.n0] = -Integer(spec.d);
  c[spec.n0 + 1] = 1;
  return c;
}

SpectralReport char_poly_roots(const RecurrenceSpec& spec, long precision_bits) {
  spec.validate();
  require(precision_bits >= 64, Errc::InvalidArgument, "precision must be at least 64 bits");
  const long prec = precision_bits;
  SpectralReport rep;
  rep.spec = spec;
  rep.charpoly = char_poly(spec);
  rep.precision_bits = prec;

  detail::QPoly p;
  for (const auto& c : rep.charpoly) p.emplace_back(c);
  const long target = prec / 2;
  BigFloat err = zero_at(prec);
  for (const auto& [factor, mult] : detail::squarefree_decomposition(p)) {
    detail::RootSet rs = detail::certified_roots(
        [&f = factor](long pr) { return detail::to_complex(f, pr); }, prec, target, 16 * prec);
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
      rep.roots.emplace_back(rs.roots[i].re.with_precision(prec), rs.roots[i].im.with_precision(prec));
      rep.multiplicities.push_back(mult);
      err = max(err, rs.radii[i].with_precision(prec));
    }
  }
  rep.error_bound = err;

  std::vector<BigFloat> mods;
  for (const auto& z : rep.roots) mods.push_back(z.modulus());
  const std::size_t top = static_cast<std::size_t>(std::max_element(mods.begin(), mods.end()) - mods.begin());
  const BigFloat two_err = err + err;
  unsigned r = 0;
  std::size_t tied = 0;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (!(mods[top] - mods[i] > two_err)) {
      r += rep.multiplicities[i];
      ++tied;
    }
  }
  if (r > 2) {
    raise(Errc::MultiplicityOutOfRange, "dominant root has multiplicity " + std::to_string(r) + " (expected 1 or 2)");
  }
  const Cx<BigFloat>& lam = rep.roots[top];
  if (tied > 1 || abs(lam.im) > err || !(lam.re > err)) {
    raise(Errc::DegenerateLambda, "dominant root is not a single real positive root");
  }
  rep.lambda = lam.re;
  rep.r = r;
  if (!(rep.lambda > BigFloat(1.0, prec) + err)) {
    raise(Errc::DegenerateLambda, "dominant root " + rep.lambda.to_string(20) + " is not above 1");
  }

  BigFloat second = zero_at(prec);
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (i != top) second = max(second, mods[i]);
  }
  rep.rho = second / rep.lambda;

  if (r == 1) {
    // Simple pole of the generating function 1 / (1 - d x + h x^{n0+1}).
    std::vector<Integer> dp;
    for (std::size_t i = 1; i < rep.charpoly.size(); ++i) dp.push_back(rep.charpoly[i] * static_cast<long>(i));
    rep.q_fit = {pow(rep.lambda, static_cast<long>(spec.n0)) / eval_real(dp, rep.lambda)};
  } else {
    rep.q_fit = fit_tail(spec, rep.lambda, r, rep.rho);
  }
  return rep;
}

AsymptoticsReport check_asymptotics(const std::vector<Integer>& degrees, const SpectralReport& report) {
  require(degrees.size() >= 10, Errc::InsufficientData, "asymptotic check needs at least 10 degrees");
  require_recurrence(degrees, report.spec);
  const long prec = report.lambda.precision();
  AsymptoticsReport out;
  out.max_residual = zero_at(prec);
  const BigFloat inv = BigFloat(1.0, prec) / report.lambda;
  BigFloat scale(1.0, prec);
  for (std::size_t n = 0; n < degrees.size(); ++n) {
    const BigFloat q = q_at(report.q_fit, n, prec);
    const BigFloat res = abs(BigFloat(degrees[n], prec) * scale - q) / q;
    out.residuals.push_back(res);
    out.max_residual = max(out.max_residual, res);
    scale *= inv;
  }
  return out;
}

GrowthBounds check_growth_bounds(const std::vector<Integer>& degrees, const BigFloat& lambda) {
  require(degrees.size() >= 10, Errc::InsufficientData, "growth bounds need at least 10 degrees");
  const long prec = lambda.precision();
  GrowthBounds g{zero_at(prec), zero_at(prec)};
  Integer partial = 0;
  for (std::size_t n = 0; n < degrees.size(); ++n) {
    partial += degrees[n];
    g.c2 = max(g.c2, BigFloat(Rational(partial, degrees[n]), prec));
    if (n >= 1 && n + 1 < degrees.size()) {
      Rational ratio(degrees[n + 1], degrees[n]);
      ratio.canonicalize();
      const BigFloat dev = abs(BigFloat(ratio, prec) - lambda);
      const BigFloat nn(static_cast<long>(n), prec);
      g.c1 = max(g.c1, nn * nn * dev);
    }
  }
  return g;
}

BigFloat check_sn_identity(const RecurrenceSpec& spec, const BigFloat& lambda, const std::vector<Integer>& degrees,
                           std::size_t n_max) {
  spec.validate();
  require(degrees.size() > n_max, Errc::InsufficientData, "degree sequence shorter than n_max");
  const long prec = lambda.precision();
  const BigFloat dl = BigFloat(static_cast<long>(spec.d), prec) - lambda;
  BigFloat worst = zero_at(prec);
  BigFloat lam_n(1.0, prec);
  for (std::size_t n = 0; n <= n_max; ++n) {
    BigFloat sum = zero_at(prec);
    BigFloat lam_j(1.0, prec);
    for (std::size_t j = 1; j <= spec.n0; ++j) {
      if (n >= j) sum += lam_j * BigFloat(degrees[n - j], prec);
      lam_j *= lambda;
    }
    const BigFloat s = lam_n + dl * sum - BigFloat(degrees[n], prec);
    worst = max(worst, abs(s) / lam_n);
    lam_n *= lambda;
  }
  return worst;
}

}  // namespace qasdyn
