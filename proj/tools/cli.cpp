#include "cli.hpp"

#include <qasdyn/error.hpp>
#include <qasdyn/family2.hpp>
#include <qasdyn/greenpot.hpp>
#include <qasdyn/mapiter.hpp>
#include <qasdyn/polycore.hpp>
#include <qasdyn/rng.hpp>
#include <qasdyn/specdeg.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace qasdyn::cli {
namespace {

using nlohmann::ordered_json;
using json = ordered_json;

std::string str(const Integer& v) { return v.get_str(); }
std::string str(const Rational& v) { return v.get_str(); }

/// A negative analysis verdict that stops a command which needs a positive one.
struct NegativeVerdict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json str_array(const std::vector<Integer>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(str(x));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), Errc::InputFormat, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), Errc::InputFormat, "cannot write " + path);
  out << text;
  require(static_cast<bool>(out), Errc::InputFormat, "write failed for " + path);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  require(ec == std::errc() && p == end && !s.empty(), Errc::InputFormat,
          "bad number '" + std::string(s) + "' in " + std::string(what));
  return v;
}

/// `a`, `bi`, `a+bi`, `a-bi`; `i` alone means 1i.
std::complex<double> parse_complex(std::string s, std::string_view what) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  require(!s.empty(), Errc::InputFormat, "empty coordinate in " + std::string(what));
  if (s.back() != 'i') return {parse_double(s, what), 0.0};
  s.pop_back();
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  std::string re = split == std::string::npos ? "" : s.substr(0, split);
  std::string im = split == std::string::npos ? s : s.substr(split);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  if (!im.empty() && im[0] == '+') im.erase(0, 1);
  return {re.empty() ? 0.0 : parse_double(re, what), parse_double(im, what)};
}

CVec parse_cvec(const std::string& s, std::string_view what) {
  CVec v;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    v.push_back(parse_complex(s.substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return v;
}

json cvec_json(const CVec& v) {
  json a = json::array();
  for (const auto& c : v) a.push_back(json::array({c.real(), c.imag()}));
  return a;
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

CVec unit_point(Rng& rng, std::size_t n) {
  CVec z(n);
  double s = 0;
  for (auto& c : z) {
    c = {rng.normal(), rng.normal()};
    s += std::norm(c);
  }
  for (auto& c : z) c /= std::sqrt(s);
  return z;
}

// ---------------------------------------------------------------------------
// Inputs

struct Source {
  std::string map_path, family_path;
};

struct Loaded {
  ProjMap map;
  std::optional<FamilyInstance> family;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* m = cmd->add_option("--map", src.map_path, "map file");
  auto* f = cmd->add_option("--family", src.family_path, "family file");
  m->excludes(f);
  f->excludes(m);
}

Loaded load(const Source& src) {
  require(!src.map_path.empty() || !src.family_path.empty(), Errc::InvalidArgument, "one of --map, --family is required");
  if (!src.family_path.empty()) {
    FamilyInstance inst = parse_family_file(read_file(src.family_path));
    ProjMap m = inst.map;
    return {std::move(m), std::move(inst)};
  }
  return {parse_map_file(read_file(src.map_path)), std::nullopt};
}

json source_json(const Source& src) {
  json j = json::object();
  if (!src.map_path.empty()) j["map"] = src.map_path;
  if (!src.family_path.empty()) j["family"] = src.family_path;
  return j;
}

json certificate_json(const QASCertificate& c, const std::vector<std::string>& vars) {
  return json{{"n0", c.n0},       {"H", to_string(c.H, vars)},     {"h", c.h},
              {"d", c.d},         {"degrees", str_array(c.degrees)}, {"verified_to", c.verified_to}};
}

/// Certificate source for green-point, green-grid and verify-all.
struct ModelChoice {
  std::size_t depth = 4;
  std::string assume_h;
  unsigned assume_n0 = 1;
  long spectral_bits = 256;
};

void add_model_options(CLI::App* cmd, ModelChoice& mc) {
  cmd->add_option("--n", mc.depth, "symbolic iteration depth for certification")->check(CLI::Range(1, 64));
  cmd->add_option("--assume-h", mc.assume_h, "use this divisor H without symbolic certification");
  cmd->add_option("--assume-n0", mc.assume_n0, "lag n0 for --assume-h")->check(CLI::Range(1, 64));
}

struct Model {
  GreenModel model;
  std::string mode;  ///< "AS", "QAS" or "asserted"
};

Model build_model(const ProjMap& map, const ModelChoice& mc) {
  if (!mc.assume_h.empty()) {
    QASCertificate cert;
    cert.n0 = mc.assume_n0;
    cert.H = primitive(parse_poly(mc.assume_h, map.vars));
    require(!cert.H.is_zero() && cert.H.degree() >= 1, Errc::InvalidArgument, "--assume-h must be nonconstant");
    cert.h = cert.H.degree();
    cert.d = map.degree();
    cert.degrees = extend_degrees({cert.d, cert.h, cert.n0}, cert.n0 + 1);
    return {GreenModel::quasi_stable(map, cert, char_poly_roots({cert.d, cert.h, cert.n0}, mc.spectral_bits)),
            "asserted"};
  }
  const QASVerdict v = infer_qas(iterate_degrees(map, mc.depth));
  if (v.kind == Stability::AS) return {GreenModel::algebraically_stable(map), "AS"};
  if (v.kind == Stability::QAS) {
    const QASCertificate& c = *v.certificate;
    return {GreenModel::quasi_stable(map, c, char_poly_roots({c.d, c.h, c.n0}, mc.spectral_bits)), "QAS"};
  }
  throw NegativeVerdict("map is " + std::string(stability_name(v.kind)) + " at depth " + std::to_string(mc.depth) +
                        "; pass --assume-h to evaluate anyway");
}

json model_json(const Model& m) {
  json j{{"mode", m.mode}, {"digest", m.model.digest()}, {"lambda", m.model.lambda().to_string(20)}};
  if (m.model.certificate()) j["certificate"] = certificate_json(*m.model.certificate(), m.model.map().vars);
  return j;
}

// ---------------------------------------------------------------------------
// Output helpers

struct Out {
  std::ostream& out;
  std::ostream& err;
  bool as_json = false;

  void emit(const json& j) const { out << j.dump(2) << '\n'; }
};

json spectral_json(const SpectralReport& r) {
  const int digits = static_cast<int>(std::floor(static_cast<double>(r.precision_bits) * 0.30103)) - 2;
  json roots = json::array();
  for (std::size_t i = 0; i < r.roots.size(); ++i) {
    roots.push_back({{"re", r.roots[i].re.to_string(digits)},
                     {"im", r.roots[i].im.to_string(digits)},
                     {"multiplicity", r.multiplicities[i]}});
  }
  json q = json::array();
  for (const auto& c : r.q_fit) q.push_back(c.to_string(digits));
  return json{{"spec", {{"d", r.spec.d}, {"h", r.spec.h}, {"n0", r.spec.n0}}},
              {"precision_bits", r.precision_bits},
              {"charpoly", str_array(r.charpoly)},
              {"lambda", r.lambda.to_string(digits)},
              {"lambda_approx", r.lambda.to_double()},
              {"r", r.r},
              {"rho", r.rho.to_string(digits)},
              {"q_fit", q},
              {"roots", roots},
              {"error_bound", r.error_bound.to_string(6)}};
}

json cor_json(const PreflightReport& p, const std::vector<std::string>& vars) {
  json zeros = json::array();
  for (const auto& z : p.cor2.zeros) {
    json pt = json::array();
    for (const auto& c : z.point) pt.push_back(json::array({c.re.to_double(), c.im.to_double()}));
    json e = {{"point", pt}, {"radius", z.radius.to_double()}};
    if (z.exact) e["exact"] = json::array({str((*z.exact)[0]), str((*z.exact)[1]), str((*z.exact)[2])});
    zeros.push_back(e);
  }
  json jac = json::array();
  for (const auto& row : p.cor3.jacobian) jac.push_back(json::array({str(row[0]), str(row[1]), str(row[2])}));
  json cor2{{"finiteness", verdict_name(p.cor2.finiteness)},
            {"surrogate", verdict_name(p.cor2.surrogate)},
            {"verdict", verdict_name(p.cor2.verdict)},
            {"zeros", zeros},
            {"detail", p.cor2.detail}};
  if (p.cor2.witness) cor2["witness"] = *p.cor2.witness;
  if (p.cor2.verdict == Verdict::Unknown) cor2["precision_hint"] = p.cor2.precision_hint;
  json cor3{{"jacobian", jac},
            {"rank", p.cor3.rank},
            {"rank_verdict", verdict_name(p.cor3.rank_verdict)},
            {"pencil", verdict_name(p.cor3.pencil)},
            {"pencil_randomized", p.cor3.pencil_randomized},
            {"triples_tested", p.cor3.triples_tested}};
  if (p.cor3.pencil_witness) {
    const auto& w = *p.cor3.pencil_witness;
    cor3["pencil_witness"] = json::array({str(w[0]), str(w[1]), str(w[2])});
  }
  auto poly_or_zero = [&](const HomPoly& q) { return q.is_zero() ? std::string("0") : to_string(q, vars); };
  return json{{"overall", verdict_name(p.overall)},
              {"cor1",
               {{"verdict", verdict_name(p.cor1.verdict)},
                {"q_gcd", poly_or_zero(p.cor1.q_gcd)},
                {"pr_gcd", poly_or_zero(p.cor1.pr_gcd)}}},
              {"cor2", cor2},
              {"cor3", cor3}};
}

// ---------------------------------------------------------------------------
// Subcommands

struct Common {
  bool as_json = false;
  std::size_t max_terms = kDefaultTermCap;
};

int cmd_degrees(const Out& o, const Source& src, std::size_t n) {
  const Loaded in = load(src);
  const IterationTrace tr = iterate_degrees(in.map, n);
  if (o.as_json) {
    o.emit({{"command", "degrees"},
            {"config", {{"input", source_json(src)}, {"n", n}}},
            {"digest", certificate_digest(in.map, nullptr)},
            {"degrees", str_array(tr.degrees)}});
  } else {
    for (std::size_t i = 0; i < tr.degrees.size(); ++i) o.out << (i ? " " : "") << str(tr.degrees[i]);
    o.out << '\n';
  }
  return kOk;
}

int cmd_infer(const Out& o, const Source& src, std::size_t n) {
  const Loaded in = load(src);
  const IterationTrace tr = iterate_degrees(in.map, n);
  const QASVerdict v = infer_qas(tr);
  const auto& vars = in.map.vars;
  json j{{"command", "infer-qas"}, {"config", {{"input", source_json(src)}, {"n", n}}},
         {"verdict", stability_name(v.kind)}};
  if (v.certificate) {
    const QASCertificate& c = *v.certificate;
    j.update(certificate_json(c, vars));
    j["digest"] = certificate_digest(in.map, &c);
  } else {
    j["d"] = in.map.degree();
    j["degrees"] = str_array(tr.degrees);
    j["verified_to"] = 0;
    if (v.n0) j["n0"] = *v.n0;
    if (v.H) {
      j["H"] = to_string(*v.H, vars);
      j["h"] = v.H->degree();
    }
    if (v.kind == Stability::NotQAS) j["witness"] = v.witness;
    j["digest"] = certificate_digest(in.map, nullptr);
  }
  json extracted = json::array();
  for (std::size_t i = 1; i < tr.extracted.size(); ++i) extracted.push_back(to_string(tr.extracted[i], vars));
  j["extracted"] = extracted;
  if (o.as_json) {
    o.emit(j);
  } else {
    o.out << "verdict " << stability_name(v.kind) << '\n';
    o.out << "degrees";
    for (const auto& d : tr.degrees) o.out << ' ' << str(d);
    o.out << '\n';
    if (j.contains("n0")) o.out << "n0 " << j["n0"].get<unsigned>() << '\n';
    if (j.contains("H")) o.out << "H " << j["H"].get<std::string>() << '\n';
    if (v.kind == Stability::NotQAS) o.out << "witness n = " << v.witness << '\n';
  }
  return (v.kind == Stability::AS || v.kind == Stability::QAS) ? kOk : kNegative;
}

int cmd_lambda(const Out& o, const RecurrenceSpec& spec, long prec) {
  const SpectralReport r = char_poly_roots(spec, prec);
  json j{{"command", "lambda"}};
  j.update(spectral_json(r));
  if (o.as_json) {
    o.emit(j);
  } else {
    o.out << "lambda " << j["lambda"].get<std::string>() << "\nr " << r.r << "\nrho " << j["rho"].get<std::string>()
          << '\n';
  }
  return kOk;
}

int cmd_family_gen(const Out& o, unsigned deg_p, unsigned deg_q, unsigned bound, std::uint64_t seed,
                   const std::string& out_path) {
  const FamilyInstance inst = random_family(deg_p, deg_q, bound, seed);
  const std::string text = format_family_file(inst);
  if (!out_path.empty()) write_file(out_path, text);
  if (o.as_json) {
    const auto& v = inst.vars;
    o.emit({{"command", "family-gen"},
            {"config", {{"deg_p", deg_p}, {"deg_q", deg_q}, {"coeff_bound", bound}, {"seed", seed}}},
            {"vars", v},
            {"P", to_string(inst.P, v)},
            {"Q1", to_string(inst.Q1, v)},
            {"Q2", to_string(inst.Q2, v)},
            {"Q3", to_string(inst.Q3, v)},
            {"R", to_string(inst.R, v)},
            {"spec", {{"d", inst.spec.d}, {"h", inst.spec.h}, {"n0", inst.spec.n0}}},
            {"digest", certificate_digest(inst.map, nullptr)}});
  } else if (out_path.empty()) {
    o.out << text;
  }
  return kOk;
}

int cmd_family_check(const Out& o, const std::string& path, long prec, std::size_t samples, std::uint64_t seed) {
  const FamilyInstance inst = parse_family_file(read_file(path));
  const PreflightReport p = preflight(inst, prec, samples, seed);
  json j{{"command", "family-check"},
         {"config", {{"family", path}, {"precision_bits", prec}, {"samples", samples}, {"seed", seed}}}};
  j.update(cor_json(p, inst.vars));
  j["digest"] = certificate_digest(inst.map, nullptr);
  if (o.as_json) {
    o.emit(j);
  } else {
    o.out << "cor1 " << verdict_name(p.cor1.verdict) << "\ncor2 " << verdict_name(p.cor2.verdict) << " ("
          << p.cor2.zeros.size() << " common zeros)\ncor3 rank " << p.cor3.rank << ' '
          << verdict_name(p.cor3.rank_verdict) << ", pencil " << verdict_name(p.cor3.pencil) << "\noverall "
          << verdict_name(p.overall) << '\n';
  }
  return p.overall == Verdict::Fail ? kNegative : kOk;
}

struct GreenFlags {
  std::size_t iters = 40;
  long precision = 53;
  double tol = 0;
  GreenOptions options() const { return {iters, precision, tol}; }
};

void add_green_flags(CLI::App* cmd, GreenFlags& g) {
  cmd->add_option("--iters", g.iters, "recursion depth")->check(CLI::Range(1, 100000));
  cmd->add_option("--precision", g.precision, "53 for doubles, more for MPFR")->check(CLI::Range(53, 100000));
  cmd->add_option("--tol", g.tol, "raise NotConverged above this final increment");
}

int cmd_green_point(const Out& o, const Source& src, const ModelChoice& mc, const GreenFlags& gf,
                    const std::string& point, bool residual, std::size_t telescope) {
  const Loaded in = load(src);
  const Model m = build_model(in.map, mc);
  const CVec z = parse_cvec(point, "--point");
  const GreenResult r = green_eval(m.model, z, gf.options());
  json j{{"command", "green-point"},
         {"config",
          {{"input", source_json(src)},
           {"point", cvec_json(z)},
           {"iters", gf.iters},
           {"precision_bits", gf.precision}}},
         {"model", model_json(m)},
         {"u", r.u},
         {"history", r.history}};
  if (residual) j["functional_residual"] = functional_eq_residual(m.model, z, gf.options());
  if (telescope > 0) j["telescope_residual"] = telescope_residual(m.model, z, telescope, gf.options());
  if (o.as_json) {
    o.emit(j);
  } else {
    o.out << "u " << j["u"].dump() << '\n';
    if (residual) o.out << "functional_residual " << j["functional_residual"].dump() << '\n';
    if (telescope > 0) o.out << "telescope_residual " << j["telescope_residual"].dump() << '\n';
  }
  return kOk;
}

struct GridFlags {
  std::string base, e1, e2, box = "-1,1,-1,1";
  std::size_t resolution = 64;
  unsigned workers = 0;
  std::string csv, pgm, sidecar, laplacian;
};

int cmd_green_grid(const Out& o, const Source& src, const ModelChoice& mc, const GreenFlags& gf, const GridFlags& f) {
  const Loaded in = load(src);
  const Model m = build_model(in.map, mc);
  Slice s;
  s.base = parse_cvec(f.base, "--base");
  s.e1 = parse_cvec(f.e1, "--e1");
  s.e2 = parse_cvec(f.e2, "--e2");
  const CVec box = parse_cvec(f.box, "--box");
  require(box.size() == 4 && std::all_of(box.begin(), box.end(), [](auto c) { return c.imag() == 0; }),
          Errc::InputFormat, "--box takes four real numbers xmin,xmax,ymin,ymax");
  s.x_min = box[0].real();
  s.x_max = box[1].real();
  s.y_min = box[2].real();
  s.y_max = box[3].real();
  require(s.x_min < s.x_max && s.y_min < s.y_max, Errc::InvalidArgument, "--box must have min < max");

  const GreenGrid g = grid_sample(m.model, s, f.resolution, gf.options(), f.workers);
  if (!f.csv.empty()) {
    std::ostringstream ss;
    write_csv(g, ss);
    write_file(f.csv, ss.str());
  }
  if (!f.pgm.empty()) {
    std::ostringstream ss;
    write_pgm(g, ss);
    write_file(f.pgm, ss.str());
    write_file(f.sidecar.empty() ? f.pgm + ".json" : f.sidecar, grid_sidecar_json(g) + "\n");
  }
  std::size_t counts[4] = {0, 0, 0, 0};
  for (NodeStatus st : g.status) ++counts[static_cast<int>(st)];
  json j{{"command", "green-grid"},
         {"config",
          {{"input", source_json(src)},
           {"base", cvec_json(s.base)},
           {"e1", cvec_json(s.e1)},
           {"e2", cvec_json(s.e2)},
           {"box", {s.x_min, s.x_max, s.y_min, s.y_max}},
           {"resolution", f.resolution},
           {"iters", gf.iters},
           {"precision_bits", gf.precision}}},
         {"model", model_json(m)},
         {"status_counts",
          {{"OK", counts[0]}, {"HitIndeterminacy", counts[1]}, {"HitDivisor", counts[2]}, {"NotConverged", counts[3]}}}};
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    if (g.status[k] != NodeStatus::OK) continue;
    lo = std::min(lo, g.values[k]);
    hi = std::max(hi, g.values[k]);
  }
  j["min"] = counts[0] ? json(lo) : json(nullptr);
  j["max"] = counts[0] ? json(hi) : json(nullptr);
  if (!f.laplacian.empty()) {
    const LaplacianField lf = laplacian_diagnostic(g);
    std::ostringstream ss;
    ss << "x,y,laplacian\n";
    for (std::size_t jy = 0; jy < g.resolution; ++jy) {
      for (std::size_t ix = 0; ix < g.resolution; ++ix) {
        const double v = lf.values[jy * g.resolution + ix];
        ss << json(g.x_at(ix)).dump() << ',' << json(g.y_at(jy)).dump() << ',';
        if (!std::isnan(v)) ss << json(v).dump();
        ss << '\n';
      }
    }
    write_file(f.laplacian, ss.str());
    double peak = 0;
    for (double v : lf.values) {
      if (!std::isnan(v)) peak = std::max(peak, v);
    }
    j["laplacian_max"] = peak;
  }
  if (o.as_json) {
    o.emit(j);
  } else {
    o.out << "nodes " << g.values.size() << " ok " << counts[0] << " indeterminacy " << counts[1] << " divisor "
          << counts[2] << " not_converged " << counts[3] << '\n';
  }
  return kOk;
}

// verify-all --------------------------------------------------------------

struct VerifyFlags {
  std::size_t points = 200;
  std::uint64_t seed = 1;
  long precision = 256;
  std::size_t iters = 40;
  std::string out_path;
};

struct CheckList {
  json items = json::array();
  bool ok = true;

  void add(const std::string& name, bool pass, json detail = json::object()) {
    json e{{"name", name}, {"pass", pass}};
    e.update(detail);
    items.push_back(std::move(e));
    ok = ok && pass;
  }
};

void verify_spectral(CheckList& cl, const RecurrenceSpec& spec, const SpectralReport& rep,
                     const std::vector<Integer>& trace_degrees) {
  const std::vector<Integer> ext = extend_degrees(spec, trace_degrees.size() - 1);
  cl.add("degrees_match_recurrence", ext == trace_degrees, {{"recurrence", str_array(ext)}});
  cl.add("lambda_above_one", rep.lambda > BigFloat(1L, rep.lambda.precision()),
         {{"lambda", rep.lambda.to_string(20)}, {"r", rep.r}});

  const std::vector<Integer> degs = extend_degrees(spec, 40);
  const AsymptoticsReport asy = check_asymptotics(degs, rep);
  const double r5 = asy.residuals[5].to_double(), r30 = asy.residuals[30].to_double();
  cl.add("asymptotic_residual_decay", r30 <= 1e-3 * r5, {{"residual_5", r5}, {"residual_30", r30}});

  const GrowthBounds gb = check_growth_bounds(extend_degrees(spec, 1000), rep.lambda);
  cl.add("growth_bounds_finite", gb.c1.is_finite() && gb.c2.is_finite(),
         {{"c1", gb.c1.to_double()}, {"c2", gb.c2.to_double()}});

  const double sn = check_sn_identity(spec, rep.lambda, degs, 20).to_double();
  cl.add("sn_identity", sn < 1e-9, {{"max_scaled", sn}});
}

void verify_green(CheckList& cl, const GreenModel& m, const VerifyFlags& f) {
  const std::size_t nv = m.map().nvars();
  Rng rng(f.seed);
  std::vector<double> lo, hi;
  std::size_t orbit_errors = 0, below = 0;
  for (std::size_t i = 0; i < f.points; ++i) {
    const CVec z = unit_point(rng, nv);
    try {
      const double a = functional_eq_residual(m, z, {10, 53, 0});
      const double b = functional_eq_residual(m, z, {f.iters, 53, 0});
      lo.push_back(a);
      hi.push_back(b);
      below += b < 1e-3;
    } catch (const Error& e) {
      if (e.code() == Errc::InternalInvariant) throw;
      ++orbit_errors;
    }
  }
  const double frac = hi.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(hi.size());
  const double m10 = median(lo), m40 = median(hi);
  cl.add("functional_equation", !hi.empty() && frac >= 0.95,
         {{"points_ok", hi.size()}, {"orbit_errors", orbit_errors}, {"fraction_below_1e-3", frac}});
  cl.add("functional_equation_depth", !hi.empty() && (m40 < m10 || m40 < 1e-12),
         {{"median_depth_10", m10}, {"median_depth_full", m40}});

  double worst = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const CVec z = unit_point(rng, nv);
    const std::complex<double> s(3 * rng.normal(), 3 * rng.normal());
    CVec sz = z;
    for (auto& c : sz) c *= s;
    try {
      const double diff = green_eval(m, sz).u - std::log(std::abs(s)) - green_eval(m, z).u;
      worst = std::max(worst, std::fabs(diff));
      ++pairs;
    } catch (const Error& e) {
      if (e.code() == Errc::InternalInvariant) throw;
    }
  }
  cl.add("homogeneity", pairs > 0 && worst < 1e-8, {{"pairs", pairs}, {"max_error", worst}});

  double tel = 0;
  std::size_t tel_pts = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    const CVec z = unit_point(rng, nv);
    try {
      tel = std::max(tel, telescope_residual(m, z, 3));
      ++tel_pts;
    } catch (const Error& e) {
      if (e.code() == Errc::InternalInvariant) throw;
    }
  }
  cl.add("telescope_n3", tel_pts > 0 && tel < 1e-3, {{"points", tel_pts}, {"max_residual", tel}});
}

int cmd_verify_all(const Out& o, const Source& src, std::size_t depth, const VerifyFlags& f) {
  const Loaded in = load(src);
  const auto& vars = in.map.vars;
  CheckList cl;
  json j{{"command", "verify-all"},
         {"config",
          {{"input", source_json(src)},
           {"n", depth},
           {"points", f.points},
           {"seed", f.seed},
           {"precision_bits", f.precision},
           {"iters", f.iters}}}};

  const IterationTrace tr = iterate_degrees(in.map, depth);
  const QASVerdict v = infer_qas(tr);
  j["degrees"] = str_array(tr.degrees);
  j["verdict"] = stability_name(v.kind);
  const bool stable = v.kind == Stability::AS || v.kind == Stability::QAS;
  cl.add("stability", stable, {{"verdict", stability_name(v.kind)}});

  std::optional<RecurrenceSpec> spec;
  if (v.kind == Stability::AS) {
    spec = RecurrenceSpec{in.map.degree(), 0, 1};
    j["digest"] = certificate_digest(in.map, nullptr);
  } else if (v.kind == Stability::QAS) {
    const QASCertificate& c = *v.certificate;
    spec = RecurrenceSpec{c.d, c.h, c.n0};
    j["certificate"] = certificate_json(c, vars);
    j["digest"] = certificate_digest(in.map, &c);
    for (std::size_t n = c.n0 + 1; n <= c.verified_to; ++n) {
      cl.add("lifting_recurrence_" + std::to_string(n), verify_lifting_recurrence(in.map, c, tr, n));
    }
  } else {
    j["digest"] = certificate_digest(in.map, nullptr);
    if (v.kind == Stability::NotQAS) j["witness"] = v.witness;
  }

  if (in.family) {
    const PreflightReport p = preflight(*in.family, f.precision, 20, f.seed);
    cl.add("preflight", p.overall != Verdict::Fail, {{"overall", verdict_name(p.overall)}});
    cl.add("jacobian_rank", p.cor3.rank == 2, {{"rank", p.cor3.rank}});
  }

  if (spec) {
    const SpectralReport rep = char_poly_roots(*spec, f.precision);
    j["lambda"] = rep.lambda.to_string(20);
    verify_spectral(cl, *spec, rep, tr.degrees);
    const GreenModel m = v.kind == Stability::AS ? GreenModel::algebraically_stable(in.map)
                                                 : GreenModel::quasi_stable(in.map, *v.certificate, rep);
    verify_green(cl, m, f);
  }

  j["checks"] = cl.items;
  j["passed"] = cl.ok;
  const std::string text = j.dump(2) + "\n";
  if (!f.out_path.empty()) write_file(f.out_path, text);
  if (o.as_json) {
    o.out << text;
  } else {
    for (const auto& c : cl.items) o.out << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << '\n';
    o.out << (cl.ok ? "all checks passed" : "some checks failed") << '\n';
  }
  return cl.ok ? kOk : kNegative;
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::ResourceLimit:
    case Errc::PrecisionExhausted:
    case Errc::AmplificationOverflow:
    case Errc::GenerationExhausted:
    case Errc::NotConverged:
      return kResourceLimit;
    case Errc::InternalInvariant:
      return kInternal;
    default:
      return kInputError;
  }
}

void report_error(const Out& o, std::string_view kind, std::string_view message, int code) {
  if (o.as_json) o.emit({{"error", kind}, {"message", message}, {"exit_code", code}});
  o.err << "qasdyn: ";
  if (!message.starts_with(kind)) o.err << kind << ": ";
  o.err << message << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degree growth, quasi-algebraic stability and Green potentials of rational maps of P^2", "qasdyn"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.as_json, "machine-readable output on stdout");
  app.add_option("--max-terms", common.max_terms, "cap on polynomial terms per operation")->check(CLI::PositiveNumber);

  Source src;
  std::size_t n = 4;
  RecurrenceSpec spec{3, 1, 1};
  long prec = 256;
  ModelChoice mc;
  GreenFlags gf;
  GridFlags grid;
  VerifyFlags vf;
  unsigned deg_p = 1, deg_q = 2, bound = 3;
  std::uint64_t seed = 1;
  std::size_t samples = 20, telescope = 0;
  std::string out_path, point, family_path;
  bool residual = false;

  auto with_json = [&](CLI::App* c) { c->add_flag("--json", common.as_json, "machine-readable output on stdout"); };

  auto* degrees = app.add_subcommand("degrees", "exact degree sequence d(f^0) ... d(f^n)");
  add_source(degrees, src);
  degrees->add_option("--n", n, "iteration depth")->required()->check(CLI::Range(0, 64));
  with_json(degrees);

  auto* infer = app.add_subcommand("infer-qas", "decide algebraic / quasi-algebraic stability");
  add_source(infer, src);
  infer->add_option("--n", n, "iteration depth")->required()->check(CLI::Range(1, 64));
  with_json(infer);

  auto* lambda = app.add_subcommand("lambda", "dominant root of the degree recurrence");
  lambda->set_help_flag("--help", "Print this help message and exit");
  lambda->add_option("--d", spec.d)->required();
  lambda->add_option("--h", spec.h)->required();
  lambda->add_option("--n0", spec.n0)->required();
  lambda->add_option("--precision", prec, "bits")->check(CLI::Range(64, 1 << 20));
  with_json(lambda);

  auto* fgen = app.add_subcommand("family-gen", "random member of the family P Q_j - R");
  fgen->add_option("--deg-p", deg_p)->check(CLI::Range(1, 16));
  fgen->add_option("--deg-q", deg_q)->check(CLI::Range(1, 16));
  fgen->add_option("--coeff-bound", bound)->check(CLI::Range(1, 1000000));
  fgen->add_option("--seed", seed);
  fgen->add_option("--out", out_path, "write the family file here");
  with_json(fgen);

  auto* fcheck = app.add_subcommand("family-check", "preflight checks for a family file");
  fcheck->add_option("--family", family_path)->required();
  fcheck->add_option("--precision", prec, "bits for common-zero isolation")->check(CLI::Range(64, 1 << 16));
  fcheck->add_option("--samples", samples, "random pencil triples");
  fcheck->add_option("--seed", seed);
  with_json(fcheck);

  auto* gpoint = app.add_subcommand("green-point", "Green potential at one point");
  add_source(gpoint, src);
  add_model_options(gpoint, mc);
  add_green_flags(gpoint, gf);
  gpoint->add_option("--point", point, "comma-separated coordinates, e.g. 1,0.5-2i,i")->required();
  gpoint->add_flag("--residual", residual, "also report the functional-equation residual");
  gpoint->add_option("--telescope", telescope, "also report the telescope residual at this depth");
  with_json(gpoint);

  auto* ggrid = app.add_subcommand("green-grid", "Green potential on a real 2-plane slice");
  add_source(ggrid, src);
  add_model_options(ggrid, mc);
  add_green_flags(ggrid, gf);
  ggrid->add_option("--base", grid.base)->required();
  ggrid->add_option("--e1", grid.e1)->required();
  ggrid->add_option("--e2", grid.e2)->required();
  ggrid->add_option("--box", grid.box, "xmin,xmax,ymin,ymax");
  ggrid->add_option("--res", grid.resolution, "nodes per axis")->check(CLI::Range(2, 8192));
  ggrid->add_option("--workers", grid.workers, "worker threads (default QASDYN_WORKERS or all cores)");
  ggrid->add_option("--csv", grid.csv);
  ggrid->add_option("--pgm", grid.pgm);
  ggrid->add_option("--sidecar", grid.sidecar, "sidecar JSON path (default <pgm>.json)");
  ggrid->add_option("--laplacian", grid.laplacian, "write the discrete Laplacian as CSV");
  with_json(ggrid);

  auto* vall = app.add_subcommand("verify-all", "symbolic, spectral and potential checks for one map");
  add_source(vall, src);
  vall->add_option("--n", n, "iteration depth")->check(CLI::Range(2, 64));
  vall->add_option("--points", vf.points, "random points per suite")->check(CLI::Range(1, 1000000));
  vall->add_option("--seed", vf.seed);
  vall->add_option("--precision", vf.precision, "bits")->check(CLI::Range(64, 1 << 16));
  vall->add_option("--iters", vf.iters, "recursion depth")->check(CLI::Range(11, 100000));
  vall->add_option("--out", vf.out_path, "also write the JSON report here");
  with_json(vall);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  Out o{out, err};
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    o.as_json = common.as_json;
    report_error(o, "UsageError", e.what(), kInputError);
    return kInputError;
  }
  o.as_json = common.as_json;

  try {
    TermCapGuard cap(common.max_terms);
    if (*degrees) return cmd_degrees(o, src, n);
    if (*infer) return cmd_infer(o, src, n);
    if (*lambda) return cmd_lambda(o, spec, prec);
    if (*fgen) return cmd_family_gen(o, deg_p, deg_q, bound, seed, out_path);
    if (*fcheck) return cmd_family_check(o, family_path, prec, samples, seed);
    if (*gpoint) return cmd_green_point(o, src, mc, gf, point, residual, telescope);
    if (*ggrid) return cmd_green_grid(o, src, mc, gf, grid);
    if (*vall) return cmd_verify_all(o, src, n, vf);
    return kInputError;
  } catch (const NegativeVerdict& e) {
    report_error(o, "NegativeVerdict", e.what(), kNegative);
    return kNegative;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    report_error(o, errc_name(e.code()), e.what(), code);
    return code;
  } catch (const std::bad_alloc&) {
    report_error(o, "ResourceLimit", "out of memory", kResourceLimit);
    return kResourceLimit;
  } catch (const std::exception& e) {
    report_error(o, "InternalError", e.what(), kInternal);
    return kInternal;
  }
}

}  // namespace qasdyn::cli
