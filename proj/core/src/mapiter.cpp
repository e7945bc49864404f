#include "qasdyn/mapiter.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "qasdyn/error.hpp"
#include "textfile.hpp"

namespace qasdyn {

namespace {

void check_tuple_shape(std::span<const HomPoly> comps, const char* what) {
  require(!comps.empty(), Errc::InvalidArgument, std::string(what) + ": empty tuple");
  for (const auto& c : comps) {
    if (c.nvars() != comps.size()) {
      raise(Errc::ArityMismatch, std::string(what) + ": " + std::to_string(comps.size()) +
                                     " components in " + std::to_string(c.nvars()) + " variables");
    }
  }
}

// Determinant of a rational matrix by Gaussian elimination.
Rational rational_det(std::vector<std::vector<Rational>> m) {
  const std::size_t n = m.size();
  Rational det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      const Rational f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

std::vector<std::vector<HomPoly>> jacobian(std::span<const HomPoly> comps) {
  std::vector<std::vector<HomPoly>> j;
  for (const auto& c : comps) {
    std::vector<HomPoly> row;
    for (std::size_t v = 0; v < comps.size(); ++v) row.push_back(partial(c, v));
    j.push_back(std::move(row));
  }
  return j;
}

// A nonzero value at any point proves the determinant is not identically zero.
bool jacobian_nonzero_somewhere(std::span<const HomPoly> comps) {
  const auto jac = jacobian(comps);
  const long primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Rational> pt;
    for (std::size_t v = 0; v < comps.size(); ++v) {
      pt.emplace_back(primes[(v * 5 + static_cast<std::size_t>(trial) * 3) % 16] * (v % 2 ? -1 : 1) + trial);
    }
    std::vector<std::vector<Rational>> m;
    for (const auto& row : jac) {
      std::vector<Rational> r;
      for (const auto& e : row) r.push_back(eval(e, pt));
      m.push_back(std::move(r));
    }
    if (rational_det(std::move(m)) != 0) return true;
  }
  return false;
}

std::uint32_t tuple_degree(std::span<const HomPoly> tuple) {
  for (const auto& c : tuple) {
    if (!c.is_zero()) return c.degree();
  }
  raise(Errc::AllZero, "tuple has only zero components");
}

}  // namespace

std::uint32_t ProjMap::degree() const { return tuple_degree(components); }

Rational normalize_tuple(Lifting& tuple) {
  Integer den = 1;
  Integer num = 0;
  const Term* lead = nullptr;
  for (const auto& p : tuple) {
    for (const auto& t : p.terms()) {
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), t.coeff.get_den_mpz_t());
      mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), t.coeff.get_num_mpz_t());
    }
    if (!lead && !p.is_zero()) lead = &p.leading_term();
  }
  require(lead != nullptr, Errc::AllZero, "all components are zero");
  Rational c(num, den);
  c.canonicalize();
  if (lead->coeff < 0) c = -c;
  if (c != 1) {
    const Rational inv = 1 / c;
    for (auto& p : tuple) p = inv * p;
  }
  return c;
}

Lifting identity_lifting(std::size_t nvars) {
  Lifting id;
  for (std::size_t v = 0; v < nvars; ++v) id.push_back(HomPoly::variable(nvars, v));
  return id;
}

HomPoly jacobian_determinant(std::span<const HomPoly> comps) {
  check_tuple_shape(comps, "jacobian");
  auto m = jacobian(comps);
  const std::size_t n = m.size();
  // Bareiss: every division below is exact.
  HomPoly prev = HomPoly::constant(n, 1);
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k].is_zero()) {
      std::size_t piv = k + 1;
      while (piv < n && m[piv][k].is_zero()) ++piv;
      if (piv == n) return HomPoly::zero(n);
      std::swap(m[piv], m[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = exact_div(m[k][k] * m[i][j] - m[i][k] * m[k][j], prev);
      }
      m[i][k] = HomPoly::zero(n);
    }
    prev = m[k][k];
  }
  HomPoly det = m[n - 1][n - 1];
  return sign > 0 ? det : -det;
}

ProjMap make_map(Lifting components, std::vector<std::string> vars) {
  check_tuple_shape(components, "make_map");
  std::optional<std::uint32_t> deg;
  for (const auto& c : components) {
    if (c.is_zero()) continue;
    if (deg && *deg != c.degree()) {
      raise(Errc::DegreeMismatch, "components of degrees " + std::to_string(*deg) + " and " +
                                      std::to_string(c.degree()));
    }
    deg = c.degree();
  }
  require(deg.has_value(), Errc::AllZero, "all components are zero");
  if (vars.empty()) vars = default_var_names(components.size());
  require(vars.size() == components.size(), Errc::ArityMismatch, "variable names do not match the arity");

  ProjMap f;
  f.removed_factor = gcd(components);
  if (!f.removed_factor.is_one()) {
    for (auto& c : components) c = exact_div(c, f.removed_factor);
  }
  f.scale = normalize_tuple(components);
  f.components = std::move(components);
  f.vars = std::move(vars);
  if (!jacobian_nonzero_somewhere(f.components) && jacobian_determinant(f.components).is_zero()) {
    raise(Errc::NotDominant, "the Jacobian determinant of the lifting vanishes identically");
  }
  return f;
}

Extraction compose_extract(const ProjMap& f, std::span<const HomPoly> g) {
  require(g.size() == f.nvars(), Errc::ArityMismatch, "compose_extract: lifting has the wrong number of components");
  Lifting composed;
  composed.reserve(f.nvars());
  for (const auto& c : f.components) composed.push_back(compose(c, g));
  Extraction out;
  out.factor = gcd(composed);
  if (!out.factor.is_one()) {
    for (auto& c : composed) c = exact_div(c, out.factor);
  }
  out.scale = normalize_tuple(composed);
  out.lifting = std::move(composed);
  return out;
}

IterationTrace iterate_degrees(const ProjMap& f, std::size_t n) {
  require(n >= 1, Errc::InvalidArgument, "iteration depth must be at least 1");
  IterationTrace tr;
  tr.d = f.degree();
  const std::size_t nv = f.nvars();
  tr.liftings.push_back(identity_lifting(nv));
  tr.degrees.emplace_back(1);
  tr.extracted.push_back(HomPoly::constant(nv, 1));
  tr.scales.emplace_back(1);
  for (std::size_t step = 1; step <= n; ++step) {
    Extraction e = compose_extract(f, tr.liftings.back());
    const Integer expected = Integer(tr.d) * tr.degrees.back() - Integer(e.factor.degree());
    tr.degrees.emplace_back(tuple_degree(e.lifting));
    if (tr.degrees.back() != expected) raise(Errc::InternalInvariant, "degree bookkeeping mismatch");
    tr.extracted.push_back(std::move(e.factor));
    tr.scales.push_back(e.scale);
    tr.liftings.push_back(std::move(e.lifting));
  }
  return tr;
}

std::string certificate_digest(const ProjMap& f, const QASCertificate* cert) {
  std::ostringstream canon;
  const auto names = default_var_names(f.nvars());
  for (const auto& c : f.components) canon << "map " << to_string(c, names) << '\n';
  if (cert) canon << "n0 " << cert->n0 << "\nd " << cert->d << "\nh " << cert->h << "\nH " << to_string(cert->H, names) << '\n';
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.str()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string_view stability_name(Stability s) {
  switch (s) {
    case Stability::AS:
      return "AS";
    case Stability::QAS:
      return "QAS";
    case Stability::NotQAS:
      return "NotQAS";
    case Stability::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

QASVerdict infer_qas(const IterationTrace& trace) {
  const std::size_t N = trace.depth();
  require(N >= 2, Errc::InsufficientData, "infer_qas needs a trace of depth at least 2");
  QASVerdict v;
  std::size_t first = 0;
  for (std::size_t n = 1; n <= N; ++n) {
    if (!trace.extracted[n].is_one()) {
      first = n;
      break;
    }
  }
  if (first == 0) {
    v.kind = Stability::AS;
    return v;
  }
  const unsigned n0 = static_cast<unsigned>(first - 1);
  const HomPoly& H = trace.extracted[first];
  v.n0 = n0;
  v.H = H;
  if (n0 == 0) {
    // E_1 != 1 cannot happen for a primitive map; a lag of 0 is outside the model.
    v.kind = Stability::NotQAS;
    v.witness = 1;
    return v;
  }
  if (N <= first) {
    v.kind = Stability::Inconclusive;
    return v;
  }
  for (std::size_t n = first + 1; n <= N; ++n) {
    const HomPoly expected = primitive(compose(H, trace.liftings[n - n0 - 1]));
    if (trace.extracted[n] != expected) {
      v.kind = Stability::NotQAS;
      v.witness = n;
      return v;
    }
  }
  v.kind = Stability::QAS;
  QASCertificate cert;
  cert.n0 = n0;
  cert.H = H;
  cert.h = H.degree();
  cert.d = trace.d;
  cert.verified_to = N;
  cert.degrees = trace.degrees;
  v.certificate = std::move(cert);
  return v;
}

bool verify_lifting_recurrence(const ProjMap& f, const QASCertificate& cert, const IterationTrace& trace,
                               std::size_t n) {
  if (n <= cert.n0 || n > cert.verified_to || n > trace.depth()) {
    raise(Errc::IndexOutOfRange, "lifting recurrence index " + std::to_string(n) + " outside (" +
                                     std::to_string(cert.n0) + ", " + std::to_string(cert.verified_to) + "]");
  }
  const Integer& e = trace.degrees[n - cert.n0 - 1];
  require(e.fits_ulong_p(), Errc::ResourceLimit, "divisor exponent too large");
  const HomPoly divisor = pow(cert.H, static_cast<unsigned>(e.get_ui()));
  const Lifting& prev = trace.liftings[n - 1];
  const Lifting& cur = trace.liftings[n];
  std::optional<Rational> scalar;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const HomPoly lhs = compose(prev[i], f.components);
    if (cur[i].is_zero()) {
      if (!lhs.is_zero()) return false;
      continue;
    }
    auto q = try_div(lhs, divisor);
    if (!q || q->is_zero()) return false;
    if (!scalar) scalar = q->leading_term().coeff / cur[i].leading_term().coeff;
    if (*q != *scalar * cur[i]) return false;
  }
  return scalar.has_value();
}

PointClass point_class(const ProjMap& f, std::span<const Rational> point) {
  require(point.size() == f.nvars(), Errc::ArityMismatch, "point has the wrong number of coordinates");
  require(std::any_of(point.begin(), point.end(), [](const Rational& x) { return x != 0; }), Errc::ZeroVector,
          "the zero vector is not a projective point");
  PointClass pc;
  for (const auto& c : f.components) pc.image.push_back(eval(c, point));
  auto nz = std::find_if(pc.image.begin(), pc.image.end(), [](const Rational& x) { return x != 0; });
  if (nz == pc.image.end()) {
    pc.indeterminate = true;
    pc.image.clear();
    return pc;
  }
  const Rational s = *nz;
  for (auto& x : pc.image) x /= s;
  return pc;
}

ProjMap parse_map_file(std::string_view text) {
  std::vector<std::string> vars;
  std::vector<std::string> maps;
  for (const auto& line : detail::read_keyed_lines(text)) {
    const std::string where = "line " + std::to_string(line.line_no) + ": ";
    if (line.key == "vars") {
      require(vars.empty(), Errc::InputFormat, where + "duplicate 'vars' line");
      require(maps.empty(), Errc::InputFormat, where + "'vars' must precede 'map' lines");
      vars = detail::split_words(line.payload);
      require(!vars.empty(), Errc::InputFormat, where + "'vars' needs at least one name");
    } else if (line.key == "map") {
      require(!vars.empty(), Errc::InputFormat, where + "'map' before 'vars'");
      maps.push_back(line.payload);
    } else {
      raise(Errc::InputFormat, where + "unknown keyword '" + line.key + "'");
    }
  }
  require(!vars.empty(), Errc::InputFormat, "missing 'vars' line");
  require(maps.size() == vars.size(), Errc::InputFormat,
          "expected " + std::to_string(vars.size()) + " 'map' lines, found " + std::to_string(maps.size()));
  Lifting comps;
  for (const auto& m : maps) comps.push_back(parse_poly(m, vars));
  return make_map(std::move(comps), std::move(vars));
}

std::string format_map_file(const ProjMap& f) {
  std::ostringstream out;
  out << "vars";
  for (const auto& v : f.vars) out << ' ' << v;
  out << '\n';
  for (const auto& c : f.components) out << "map " << to_string(c, f.vars) << '\n';
  return out.str();
}

}  // namespace qasdyn
