#include "qasdyn/greenpot.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "qasdyn/complex.hpp"
#include "qasdyn/error.hpp"

namespace qasdyn {

namespace detail {

struct CompiledPoly {
  std::vector<std::vector<std::uint32_t>> exps;
  std::vector<Rational> coeffs;
  std::vector<double> dcoeffs;
  double abs_sum = 0.0;

  explicit CompiledPoly(const HomPoly& p) {
    for (const auto& t : p.terms()) {
      exps.push_back(t.monomial.exponents());
      coeffs.push_back(t.coeff);
      dcoeffs.push_back(t.coeff.get_d());
      abs_sum += std::fabs(t.coeff.get_d());
    }
  }
};

struct GreenTables {
  std::vector<CompiledPoly> comps;
  std::optional<CompiledPoly> H;
  std::vector<std::uint32_t> max_exp;
  double comp_scale = 0.0;
};

}  // namespace detail

namespace {

using detail::CompiledPoly;
using detail::GreenTables;

template <class Real>
Real real_from(const BigFloat& x, long prec) {
  if constexpr (std::is_same_v<Real, double>) {
    (void)prec;
    return x.to_double();
  } else {
    return x.with_precision(prec);
  }
}

template <class Real>
double as_double(const Real& x) {
  return RealOps<Real>::to_double(x);
}

template <class Real>
Real log_of(const Real& x) {
  using std::log;
  return log(x);
}

template <class Real>
struct Ctx {
  const GreenModel& m;
  long prec;
  Real zero;
  Real tol_rel;

  Ctx(const GreenModel& model, long p)
      : m(model),
        prec(p),
        zero(RealOps<Real>::from(0.0, p)),
        tol_rel(std::is_same_v<Real, double> ? RealOps<Real>::from(1e-14, p)
                                             : real_from<Real>(ldexp_one(-(p - 6), p), p)) {}

  Cx<Real> czero() const { return Cx<Real>(zero, zero); }

  // Powers of each coordinate up to the largest exponent in use.
  std::vector<std::vector<Cx<Real>>> powers(const std::vector<Cx<Real>>& x) const {
    const auto& maxe = m.tables().max_exp;
    std::vector<std::vector<Cx<Real>>> pw(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      pw[i].reserve(maxe[i] + 1);
      pw[i].push_back(Cx<Real>(RealOps<Real>::from(1.0, prec), zero));
      for (std::uint32_t e = 1; e <= maxe[i]; ++e) pw[i].push_back(pw[i].back() * x[i]);
    }
    return pw;
  }

  Cx<Real> eval(const CompiledPoly& p, const std::vector<std::vector<Cx<Real>>>& pw) const {
    Cx<Real> acc = czero();
    for (std::size_t k = 0; k < p.exps.size(); ++k) {
      Cx<Real> term(coeff(p, k), zero);
      for (std::size_t i = 0; i < pw.size(); ++i) {
        if (p.exps[k][i] != 0) term *= pw[i][p.exps[k][i]];
      }
      acc += term;
    }
    return acc;
  }

  Real coeff(const CompiledPoly& p, std::size_t k) const {
    if constexpr (std::is_same_v<Real, double>) {
      return p.dcoeffs[k];
    } else {
      return BigFloat(p.coeffs[k], prec);
    }
  }

  std::vector<Cx<Real>> apply_F(const std::vector<Cx<Real>>& x) const {
    const auto pw = powers(x);
    std::vector<Cx<Real>> out;
    for (const auto& c : m.tables().comps) out.push_back(eval(c, pw));
    return out;
  }

  Cx<Real> apply_H(const std::vector<Cx<Real>>& x) const { return eval(*m.tables().H, powers(x)); }

  static Real norm(const std::vector<Cx<Real>>& x) {
    Real s = x[0].norm();
    for (std::size_t i = 1; i < x.size(); ++i) s += x[i].norm();
    using std::sqrt;
    return sqrt(s);
  }

  std::vector<Cx<Real>> scaled(const std::vector<Cx<Real>>& x, const Real& s) const {
    std::vector<Cx<Real>> out;
    for (const auto& c : x) out.push_back(Cx<Real>(c.re / s, c.im / s));
    return out;
  }

  // |F(w)| checked against the indeterminacy tolerance.
  Real f_norm_checked(const std::vector<Cx<Real>>& fw, std::size_t step) const {
    const Real nf = norm(fw);
    if (!(nf > tol_rel * RealOps<Real>::from(m.tables().comp_scale, prec))) {
      raise(Errc::OrbitHitIndeterminacy, "orbit reached the indeterminacy locus at step " + std::to_string(step));
    }
    return nf;
  }

  Real h_abs_checked(const Cx<Real>& hv, std::size_t step) const {
    const Real a = hv.modulus();
    if (!(a > tol_rel * RealOps<Real>::from(m.tables().H->abs_sum, prec))) {
      raise(Errc::OrbitHitDivisor, "orbit reached {H = 0} at step " + std::to_string(step));
    }
    return a;
  }
};

template <class Real>
std::vector<Cx<Real>> to_cx(const CVec& z, long prec) {
  std::vector<Cx<Real>> out;
  for (const auto& c : z) out.push_back(make_cx<Real>(c.real(), c.imag(), prec));
  return out;
}

// gamma_N for the normalized recursion; increments go to `hist` when given.
template <class Real>
Real potential(const Ctx<Real>& cx, const std::vector<Cx<Real>>& z, std::size_t n_iters, double tol,
               std::vector<double>* hist) {
  const GreenModel& m = cx.m;
  require(z.size() == m.map().nvars(), Errc::ArityMismatch, "point has the wrong number of coordinates");
  const Real s = Ctx<Real>::norm(z);
  require(s > cx.zero, Errc::ZeroVector, "the zero vector is not a point of projective space");

  const std::vector<Integer> degs = m.degrees(n_iters);
  const RecurrenceSpec& sp = m.spec();
  const std::size_t lag = sp.n0 + 1;
  std::vector<std::vector<Cx<Real>>> ws{cx.scaled(z, s)};
  std::vector<Real> gs{log_of(s)};
  for (std::size_t n = 1; n <= n_iters; ++n) {
    const bool divides = m.is_qas() && n >= lag;
    const Real habs = divides ? cx.h_abs_checked(cx.apply_H(ws[n - lag]), n) : cx.zero;
    const auto fw = cx.apply_F(ws[n - 1]);
    const Real nf = cx.f_norm_checked(fw, n);
    Real a = RealOps<Real>::from(Rational(Integer(sp.d) * degs[n - 1], degs[n]), cx.prec);
    Real g = a * gs[n - 1];
    Real logs = log_of(nf);
    if (divides) {
      const Real b = RealOps<Real>::from(Rational(Integer(sp.h) * degs[n - lag], degs[n]), cx.prec);
      g -= b * gs[n - lag];
      logs -= log_of(habs);
    }
    g += logs / RealOps<Real>::from(degs[n], cx.prec);
    if (hist) hist->push_back(std::fabs(as_double<Real>(g - gs[n - 1])));
    ws.push_back(cx.scaled(fw, nf));
    gs.push_back(std::move(g));
  }
  if (tol > 0 && n_iters > 0) {
    const double last = std::fabs(as_double<Real>(gs[n_iters] - gs[n_iters - 1]));
    if (last > tol) {
      raise(Errc::NotConverged, "last increment " + std::to_string(last) + " exceeds tolerance " + std::to_string(tol));
    }
  }
  return gs.back();
}

template <class Real>
double functional_residual_impl(const GreenModel& m, const CVec& z, const GreenOptions& opt) {
  const Ctx<Real> cx(m, opt.precision);
  auto x = to_cx<Real>(z, opt.precision);
  require(x.size() == m.map().nvars(), Errc::ArityMismatch, "point has the wrong number of coordinates");
  const Real s = Ctx<Real>::norm(x);
  require(s > cx.zero, Errc::ZeroVector, "the zero vector is not a point of projective space");
  x = cx.scaled(x, s);
  const auto fx = cx.apply_F(x);
  cx.f_norm_checked(fx, 0);
  const Real u0 = potential(cx, x, opt.n_iters, opt.tol, nullptr);
  const Real u1 = potential(cx, fx, opt.n_iters, opt.tol, nullptr);
  const Real lam = real_from<Real>(m.lambda(), opt.precision);
  Real res = u1 - lam * u0;
  if (m.is_qas()) {
    const Real habs = cx.h_abs_checked(cx.apply_H(x), 0);
    const Real d = RealOps<Real>::from(static_cast<double>(m.spec().d), opt.precision);
    const Real h = RealOps<Real>::from(static_cast<double>(m.spec().h), opt.precision);
    res -= (d - lam) / h * log_of(habs);
  }
  return std::fabs(as_double<Real>(res));
}

template <class Real>
double telescope_impl(const GreenModel& m, const CVec& z, std::size_t n, const GreenOptions& opt) {
  const Ctx<Real> cx(m, opt.precision);
  auto x = to_cx<Real>(z, opt.precision);
  require(x.size() == m.map().nvars(), Errc::ArityMismatch, "point has the wrong number of coordinates");
  const Real s = Ctx<Real>::norm(x);
  require(s > cx.zero, Errc::ZeroVector, "the zero vector is not a point of projective space");
  x = cx.scaled(x, s);

  // F^j(x) = exp(ell_j) * y_j with |y_j| = 1.
  std::vector<std::vector<Cx<Real>>> ys{x};
  std::vector<Real> ell{cx.zero};
  const Real d = RealOps<Real>::from(static_cast<double>(m.spec().d), opt.precision);
  for (std::size_t j = 1; j <= n; ++j) {
    const auto fy = cx.apply_F(ys[j - 1]);
    const Real nf = cx.f_norm_checked(fy, j);
    ell.push_back(d * ell[j - 1] + log_of(nf));
    ys.push_back(cx.scaled(fy, nf));
  }
  const Real lam = real_from<Real>(m.lambda(), opt.precision);
  const Real lam_n = real_from<Real>(pow(m.lambda(), static_cast<long>(n)), opt.precision);
  Real lhs = potential(cx, ys[n], opt.n_iters, opt.tol, nullptr) + ell[n];
  Real rhs = lam_n * potential(cx, ys[0], opt.n_iters, opt.tol, nullptr);
  if (m.is_qas()) {
    const Real h = RealOps<Real>::from(static_cast<double>(m.spec().h), opt.precision);
    Real sum = cx.zero;
    Real lam_j = RealOps<Real>::from(1.0, opt.precision);
    for (std::size_t j = 1; j <= n; ++j) {
      const Real habs = cx.h_abs_checked(cx.apply_H(ys[n - j]), n - j);
      sum += lam_j * (log_of(habs) + h * ell[n - j]);
      lam_j *= lam;
    }
    rhs += (d - lam) / h * sum;
  }
  return std::fabs(as_double<Real>((lhs - rhs) / lam_n));
}

std::shared_ptr<const GreenTables> make_tables(const ProjMap& f, const HomPoly* H) {
  auto t = std::make_shared<GreenTables>();
  t->max_exp.assign(f.nvars(), 0);
  auto note = [&](const HomPoly& p) {
    for (const auto& term : p.terms()) {
      for (std::size_t i = 0; i < f.nvars(); ++i) t->max_exp[i] = std::max(t->max_exp[i], term.monomial[i]);
    }
  };
  for (const auto& c : f.components) {
    t->comps.emplace_back(c);
    t->comp_scale = std::max(t->comp_scale, t->comps.back().abs_sum);
    note(c);
  }
  if (H) {
    t->H.emplace(*H);
    note(*H);
  }
  return t;
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

GreenModel GreenModel::algebraically_stable(const ProjMap& f) {
  GreenModel m;
  m.map_ = f;
  m.spec_ = {f.degree(), 0, 1};
  m.spec_.validate();
  m.lambda_ = BigFloat(static_cast<long>(f.degree()), 512);
  m.tables_ = make_tables(m.map_, nullptr);
  return m;
}

GreenModel GreenModel::quasi_stable(const ProjMap& f, const QASCertificate& cert, const SpectralReport& report) {
  require(cert.d == f.degree(), Errc::InvalidArgument, "certificate degree differs from the map degree");
  require(cert.H.nvars() == f.nvars() && !cert.H.is_zero() && cert.H.degree() == cert.h, Errc::InvalidArgument,
          "certificate divisor does not match h");
  const RecurrenceSpec spec{cert.d, cert.h, cert.n0};
  require(report.spec == spec, Errc::InvalidArgument, "spectral report belongs to a different recurrence");
  GreenModel m;
  m.map_ = f;
  m.cert_ = cert;
  m.spec_ = spec;
  m.lambda_ = report.lambda;
  m.tables_ = make_tables(m.map_, &m.cert_->H);
  return m;
}

std::vector<Integer> GreenModel::degrees(std::size_t n) const { return extend_degrees(spec_, n); }

std::string GreenModel::digest() const { return certificate_digest(map_, cert_ ? &*cert_ : nullptr); }

GreenResult green_eval(const GreenModel& m, const CVec& z, const GreenOptions& opt) {
  GreenResult r;
  if (opt.precision <= 53) {
    const Ctx<double> cx(m, 53);
    r.u = potential(cx, to_cx<double>(z, 53), opt.n_iters, opt.tol, &r.history);
  } else {
    const Ctx<BigFloat> cx(m, opt.precision);
    r.u = potential(cx, to_cx<BigFloat>(z, opt.precision), opt.n_iters, opt.tol, &r.history).to_double();
  }
  return r;
}

double functional_eq_residual(const GreenModel& m, const CVec& z, const GreenOptions& opt) {
  return opt.precision <= 53 ? functional_residual_impl<double>(m, z, opt)
                             : functional_residual_impl<BigFloat>(m, z, opt);
}

double telescope_residual(const GreenModel& m, const CVec& z, std::size_t n, const GreenOptions& opt) {
  require(n >= 1, Errc::InvalidArgument, "telescoping depth must be at least 1");
  if (n > kMaxTelescopeDepth) {
    raise(Errc::AmplificationOverflow, "telescoping depth " + std::to_string(n) + " exceeds " +
                                           std::to_string(kMaxTelescopeDepth));
  }
  return opt.precision <= 53 ? telescope_impl<double>(m, z, n, opt) : telescope_impl<BigFloat>(m, z, n, opt);
}

std::string_view node_status_name(NodeStatus s) {
  switch (s) {
    case NodeStatus::OK: return "OK";
    case NodeStatus::HitIndeterminacy: return "HitIndeterminacy";
    case NodeStatus::HitDivisor: return "HitDivisor";
    case NodeStatus::NotConverged: return "NotConverged";
  }
  return "?";
}

double GreenGrid::x_at(std::size_t i) const {
  if (i == 0) return slice.x_min;
  return slice.x_min + (slice.x_max - slice.x_min) * static_cast<double>(i) / static_cast<double>(resolution - 1);
}

double GreenGrid::y_at(std::size_t j) const {
  if (j == 0) return slice.y_min;
  return slice.y_min + (slice.y_max - slice.y_min) * static_cast<double>(j) / static_cast<double>(resolution - 1);
}

GreenGrid grid_sample(const GreenModel& m, const Slice& slice, std::size_t resolution, const GreenOptions& opt,
                      unsigned workers) {
  const std::size_t nv = m.map().nvars();
  require(slice.base.size() == nv && slice.e1.size() == nv && slice.e2.size() == nv, Errc::ArityMismatch,
          "slice vectors have the wrong number of coordinates");
  require(resolution >= 2, Errc::InvalidArgument, "resolution must be at least 2");
  double n1 = 0, n2 = 0;
  double ip = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    n1 += std::norm(slice.e1[i]);
    n2 += std::norm(slice.e2[i]);
    ip += std::real(std::conj(slice.e1[i]) * slice.e2[i]);
  }
  require(n1 * n2 - ip * ip > 1e-12 * n1 * n2 && n1 > 0 && n2 > 0, Errc::InvalidArgument,
          "slice directions are linearly dependent");

  GreenGrid g;
  g.slice = slice;
  g.resolution = resolution;
  g.n_iters = opt.n_iters;
  g.precision = opt.precision;
  g.certificate = m.digest();
  const std::size_t total = resolution * resolution;
  g.values.assign(total, std::numeric_limits<double>::quiet_NaN());
  g.status.assign(total, NodeStatus::OK);

  if (workers == 0) {
    if (const char* env = std::getenv("QASDYN_WORKERS")) workers = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const double x = g.x_at(k % resolution);
      const double y = g.y_at(k / resolution);
      CVec p(nv);
      for (std::size_t i = 0; i < nv; ++i) p[i] = slice.base[i] + x * slice.e1[i] + y * slice.e2[i];
      try {
        g.values[k] = green_eval(m, p, opt).u;
      } catch (const Error& e) {
        switch (e.code()) {
          case Errc::OrbitHitDivisor: g.status[k] = NodeStatus::HitDivisor; break;
          case Errc::NotConverged: g.status[k] = NodeStatus::NotConverged; break;
          case Errc::OrbitHitIndeterminacy:
          case Errc::ZeroVector: g.status[k] = NodeStatus::HitIndeterminacy; break;
          default: throw;
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex fail_mu;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        try {
          work();
        } catch (...) {
          std::lock_guard lock(fail_mu);
          if (!failure) failure = std::current_exception();
          next = total;
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return g;
}

LaplacianField laplacian_diagnostic(const GreenGrid& grid) {
  const std::size_t n = grid.resolution;
  LaplacianField out;
  out.resolution = n;
  out.values.assign(n * n, std::numeric_limits<double>::quiet_NaN());
  const double hx = (grid.slice.x_max - grid.slice.x_min) / static_cast<double>(n - 1);
  const double hy = (grid.slice.y_max - grid.slice.y_min) / static_cast<double>(n - 1);
  auto ok = [&](std::size_t i, std::size_t j) { return grid.status_at(i, j) == NodeStatus::OK; };
  bool any = false;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      bool region = true;
      for (std::size_t dj = 0; dj < 3 && region; ++dj) {
        for (std::size_t di = 0; di < 3 && region; ++di) region = ok(i + di - 1, j + dj - 1);
      }
      any = any || region;
      if (!(ok(i, j) && ok(i - 1, j) && ok(i + 1, j) && ok(i, j - 1) && ok(i, j + 1))) continue;
      const double u = grid.value(i, j);
      const double lap = (grid.value(i - 1, j) - 2 * u + grid.value(i + 1, j)) / (hx * hx) +
                         (grid.value(i, j - 1) - 2 * u + grid.value(i, j + 1)) / (hy * hy);
      out.values[j * n + i] = std::fabs(lap);
    }
  }
  require(any, Errc::InsufficientOKRegion, "no node has a fully OK 3x3 neighbourhood");
  return out;
}

void write_csv(const GreenGrid& grid, std::ostream& out) {
  out << "x,y,u,status\n";
  for (std::size_t j = 0; j < grid.resolution; ++j) {
    for (std::size_t i = 0; i < grid.resolution; ++i) {
      const NodeStatus st = grid.status_at(i, j);
      out << shortest(grid.x_at(i)) << ',' << shortest(grid.y_at(j)) << ',';
      if (st == NodeStatus::OK) out << shortest(grid.value(i, j));
      out << ',' << node_status_name(st) << '\n';
    }
  }
}

namespace {

std::pair<double, double> ok_range(const GreenGrid& grid) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    if (grid.status[k] != NodeStatus::OK) continue;
    lo = std::min(lo, grid.values[k]);
    hi = std::max(hi, grid.values[k]);
  }
  return {lo, hi};
}

}  // namespace

void write_pgm(const GreenGrid& grid, std::ostream& out) {
  const auto [lo, hi] = ok_range(grid);
  out << "P2\n" << grid.resolution << ' ' << grid.resolution << "\n65535\n";
  for (std::size_t j = 0; j < grid.resolution; ++j) {
    for (std::size_t i = 0; i < grid.resolution; ++i) {
      long level = 0;
      if (grid.status_at(i, j) == NodeStatus::OK) {
        const double t = hi > lo ? (grid.value(i, j) - lo) / (hi - lo) : 0.0;
        level = 1 + std::lround(t * 65534.0);
      }
      out << level << (i + 1 == grid.resolution ? '\n' : ' ');
    }
  }
}

std::string grid_sidecar_json(const GreenGrid& grid) {
  const auto [lo, hi] = ok_range(grid);
  auto vec = [](const CVec& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : v) arr.push_back({c.real(), c.imag()});
    return arr;
  };
  nlohmann::json j;
  std::size_t ok = 0;
  for (auto s : grid.status) ok += s == NodeStatus::OK;
  j["min"] = ok ? nlohmann::json(lo) : nlohmann::json(nullptr);
  j["max"] = ok ? nlohmann::json(hi) : nlohmann::json(nullptr);
  j["resolution"] = grid.resolution;
  j["ok_nodes"] = ok;
  j["depth"] = grid.n_iters;
  j["precision_bits"] = grid.precision;
  j["certificate_digest"] = grid.certificate;
  j["slice"] = {{"base", vec(grid.slice.base)},
                {"e1", vec(grid.slice.e1)},
                {"e2", vec(grid.slice.e2)},
                {"x_range", {grid.slice.x_min, grid.slice.x_max}},
                {"y_range", {grid.slice.y_min, grid.slice.y_max}}};
  return j.dump(2) + "\n";
}

}  // namespace qasdyn
