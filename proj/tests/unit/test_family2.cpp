#include <gtest/gtest.h>
#include <qasdyn/error.hpp>
#include <qasdyn/family2.hpp>
#include <qasdyn/rng.hpp>

#include <fstream>
#include <sstream>

#include "gen.hpp"

using namespace qasdyn;

namespace qasdyn {
void PrintTo(const HomPoly& p, std::ostream* os) { *os << to_string(p, default_var_names(p.nvars())); }
}  // namespace qasdyn

namespace {

const std::vector<std::string> kZWT{"z", "w", "t"};

HomPoly P(const std::string& s) { return parse_poly(s, kZWT); }

FamilyInstance family(const char* p, const char* q1, const char* q2, const char* q3, const char* r) {
  return build_family_map(P(p), P(q1), P(q2), P(q3), P(r));
}

FamilyInstance reference() { return family("z", "w^2", "t^2", "z*w", "w^2*t"); }

// Bypasses validation, for checks on data build_family_map rejects.
FamilyInstance unchecked(const char* p, const char* q1, const char* q2, const char* q3, const char* r) {
  FamilyInstance inst;
  inst.P = P(p);
  inst.Q1 = P(q1);
  inst.Q2 = P(q2);
  inst.Q3 = P(q3);
  inst.R = P(r);
  inst.vars = kZWT;
  return inst;
}

template <class F>
Errc error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no qasdyn::Error thrown";
  return Errc::InternalInvariant;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(BuildFamily, ReferenceInstance) {
  FamilyInstance f = reference();
  EXPECT_EQ(f.map.components, (Lifting{P("z*w^2 - w^2*t"), P("z*t^2 - w^2*t"), P("z^2*w - w^2*t")}));
  EXPECT_EQ(f.spec, (RecurrenceSpec{3, 1, 1}));
  EXPECT_EQ(f.map.degree(), 3u);
}

TEST(BuildFamily, Errors) {
  EXPECT_EQ(error_of([] { family("z", "w^2", "t^2", "z*w", "2*w^2*t"); }), Errc::NormalizationViolated);
  EXPECT_EQ(error_of([] { family("z", "w^2", "t^2", "z*w", "w^2"); }), Errc::DegreeConstraintViolated);
  EXPECT_EQ(error_of([] { family("z", "w^2", "t", "z*w", "w^2*t"); }), Errc::DegreeConstraintViolated);
  EXPECT_EQ(error_of([] { family("z", "w^2", "t^2", "z*w", "z*w*t"); }), Errc::CommonFactor);
  EXPECT_EQ(error_of([] { family("z", "w^2", "w^2", "z*w", "w^2*t"); }), Errc::CommonFactor);
  EXPECT_EQ(error_of([] { family("z", "w^2", "w^2", "t^2", "w*t^2"); }), Errc::NotDominant);
  const std::vector<std::string> x{"x"};
  EXPECT_EQ(error_of([&] { build_family_map(P("z"), P("w^2"), P("t^2"), P("z*w"), parse_poly("x^3", x)); }),
            Errc::ArityMismatch);
}

TEST(Cor1, Examples) {
  Cor1Result ok = check_cor1(reference());
  EXPECT_EQ(ok.verdict, Verdict::Pass);
  EXPECT_TRUE(ok.q_gcd.is_one());
  EXPECT_TRUE(ok.pr_gcd.is_one());

  Cor1Result pr = check_cor1(unchecked("z", "w^2", "t^2", "z*w", "z*w*t"));
  EXPECT_EQ(pr.verdict, Verdict::Fail);
  EXPECT_EQ(pr.pr_gcd, P("z"));

  Cor1Result same = check_cor1(unchecked("z", "w^2", "w^2", "z*w", "w^2*t"));
  EXPECT_EQ(same.verdict, Verdict::Fail);
  EXPECT_TRUE(same.q_gcd.is_zero());
}

TEST(Cor2, ReferenceInstance) {
  Cor2Result r = check_cor2(reference(), 128);
  EXPECT_EQ(r.finiteness, Verdict::Pass);
  EXPECT_EQ(r.surrogate, Verdict::Pass);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  // {z = 0} and {w^2 t = 0} meet at [0:0:1] and [0:1:0].
  ASSERT_EQ(r.zeros.size(), 2u);
  std::vector<std::array<Rational, 3>> pts;
  for (const auto& z : r.zeros) {
    ASSERT_TRUE(z.exact);
    pts.push_back(*z.exact);
  }
  std::sort(pts.begin(), pts.end());
  EXPECT_EQ(pts[0], (std::array<Rational, 3>{0, 0, 1}));
  EXPECT_EQ(pts[1], (std::array<Rational, 3>{0, 1, 0}));
}

TEST(Cor2, RationalWitnessFails) {
  // Q1 = Q2 = Q3 = 1 at [0:1:1], which lies on z = 0 and on R = 0.
  FamilyInstance f = family("z", "w^2", "t^2", "z^2 - z*w + w*t", "z*w*t + w^2*t - w*t^2");
  ASSERT_EQ(check_cor1(f).verdict, Verdict::Pass);
  Cor2Result r = check_cor2(f, 128);
  EXPECT_EQ(r.finiteness, Verdict::Pass);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  ASSERT_TRUE(r.witness);
  ASSERT_TRUE(r.zeros[*r.witness].exact);
  EXPECT_EQ(*r.zeros[*r.witness].exact, (std::array<Rational, 3>{0, 1, 1}));
}

TEST(Cor2, IrrationalCoincidenceIsUnknown) {
  // Both differences vanish at [0 : +-sqrt(2) : 1]; no precision decides it.
  FamilyInstance f = family("z", "w^2", "2*t^2 - z*t", "2*t^2 - z*w", "w^2*t - 2*t^3 + 2*z*t^2");
  Cor2Result r = check_cor2(f, 96);
  EXPECT_EQ(r.verdict, Verdict::Unknown);
  EXPECT_EQ(r.precision_hint, 192);
  ASSERT_TRUE(r.witness);
  EXPECT_FALSE(r.zeros[*r.witness].exact);
  EXPECT_NEAR(std::fabs(r.zeros[*r.witness].point[1].re.to_double() / r.zeros[*r.witness].point[2].re.to_double()),
              std::sqrt(2.0), 1e-12);
}

TEST(Cor2, ZerosLieOnBothCurves) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    FamilyInstance f = random_family(1, 2, 4, seed);
    Cor2Result r = check_cor2(f, 128);
    EXPECT_EQ(r.zeros.size(), 3u) << seed;  // generic Bezout count
    for (const auto& z : r.zeros) {
      const auto pv = eval(f.P, std::span<const Cx<BigFloat>>(z.point.data(), 3), 128).modulus().to_double();
      const auto rv = eval(f.R, std::span<const Cx<BigFloat>>(z.point.data(), 3), 128).modulus().to_double();
      EXPECT_LT(pv, 1e-15);
      EXPECT_LT(rv, 1e-15);
    }
  }
}

TEST(Cor3, ReferenceRankAndPencil) {
  Cor3Result r = check_cor3(reference(), 20, 7);
  using Row = std::array<Rational, 3>;
  EXPECT_EQ(r.jacobian[0], (Row{1, 0, -1}));
  EXPECT_EQ(r.jacobian[1], (Row{1, -2, 1}));
  EXPECT_EQ(r.jacobian[2], (Row{2, -1, -1}));
  EXPECT_EQ(r.rank, 2u);
  EXPECT_EQ(r.rank_verdict, Verdict::Pass);
  EXPECT_EQ(r.pencil, Verdict::Pass);
  EXPECT_TRUE(r.pencil_randomized);
  EXPECT_EQ(r.triples_tested, 23u);
}

TEST(Cor3, PencilCounterexample) {
  // Q1 - Q2 = z (w - t) shares the factor P = z.
  FamilyInstance f = family("z", "w^2 + z*w", "w^2 + z*t", "t^2 + z*w", "2*w^2*t");
  Cor3Result r = check_cor3(f, 10, 1);
  EXPECT_EQ(r.pencil, Verdict::Fail);
  EXPECT_FALSE(r.pencil_randomized);
  ASSERT_TRUE(r.pencil_witness);
  EXPECT_EQ(*r.pencil_witness, (std::array<Integer, 3>{1, -1, 0}));
}

TEST(Cor3, EulerRelationOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    FamilyInstance f = random_family(1 + seed % 2, 2 + seed % 2, 5, seed);
    Cor3Result r = check_cor3(f, 2, seed);
    EXPECT_LE(r.rank, 2u);
    for (const auto& row : r.jacobian) EXPECT_EQ(row[0] + row[1] + row[2], 0);
  }
}

TEST(Preflight, Overall) {
  PreflightReport rep = preflight(reference(), 128, 10, 3);
  EXPECT_EQ(rep.overall, Verdict::Pass);
  PreflightReport bad = preflight(family("z", "w^2 + z*w", "w^2 + z*t", "t^2 + z*w", "2*w^2*t"), 128, 10, 3);
  EXPECT_EQ(bad.overall, Verdict::Fail);
}

TEST(RandomFamily, DeterministicAndValid) {
  FamilyInstance a = random_family(1, 2, 3, 42);
  FamilyInstance b = random_family(1, 2, 3, 42);
  EXPECT_EQ(format_family_file(a), format_family_file(b));
  EXPECT_EQ(a.spec, (RecurrenceSpec{3, 1, 1}));
  EXPECT_EQ(check_cor1(a).verdict, Verdict::Pass);
  FamilyInstance c = random_family(1, 2, 3, 43);
  EXPECT_NE(format_family_file(a), format_family_file(c));
  SpectralReport rep = char_poly_roots(a.spec, 128);
  EXPECT_NEAR(rep.lambda.to_double(), (3.0 + std::sqrt(5.0)) / 2.0, 1e-14);
}

TEST(RandomFamily, Errors) {
  EXPECT_EQ(error_of([] { random_family(1, 1, 3, 0); }), Errc::InvalidArgument);
  EXPECT_EQ(error_of([] { random_family(0, 2, 3, 0); }), Errc::InvalidArgument);
  EXPECT_EQ(error_of([] { random_family(1, 2, 0, 0); }), Errc::InvalidArgument);
}

TEST(FamilyGeometry, HypersurfaceGoesToOneOneOne) {
  Rng rng(2024);
  const Rational ones[3] = {1, 1, 1};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FamilyInstance f = random_family(1, 2, 4, seed);
    EXPECT_TRUE(point_class(f.map, ones).indeterminate);
    // P is linear: solve P = 0 for a coordinate with nonzero coefficient.
    std::array<Rational, 3> lin;
    for (std::size_t i = 0; i < 3; ++i) {
      std::array<Rational, 3> e{0, 0, 0};
      e[i] = 1;
      lin[i] = eval(f.P, e);
    }
    std::size_t solve = 0;
    while (lin[solve] == 0) ++solve;
    for (int k = 0; k < 20; ++k) {
      std::array<Rational, 3> pt;
      Rational rest = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        if (i == solve) continue;
        pt[i] = Rational(rng.range(-50, 50), rng.range(1, 9));
        pt[i].canonicalize();
        rest += lin[i] * pt[i];
      }
      pt[solve] = -rest / lin[solve];
      if (pt[0] == 0 && pt[1] == 0 && pt[2] == 0) continue;
      ASSERT_EQ(eval(f.P, pt), 0);
      PointClass pc = point_class(f.map, pt);
      if (!pc.indeterminate) EXPECT_EQ(pc.image, (std::vector<Rational>{1, 1, 1}));
    }
  }
}

TEST(FamilyGeometry, RandomInstanceIsQasWithDivisorP) {
  FamilyInstance f = random_family(1, 2, 2, 5);
  ASSERT_EQ(preflight(f, 128, 5, 1).overall, Verdict::Pass);
  IterationTrace tr = iterate_degrees(f.map, 3);
  QASVerdict v = infer_qas(tr);
  ASSERT_EQ(v.kind, Stability::QAS);
  EXPECT_EQ(v.certificate->n0, 1u);
  EXPECT_TRUE(equal_up_to_scalar(v.certificate->H, f.P));
  EXPECT_EQ(extend_degrees(f.spec, 3), tr.degrees);
}

TEST(FamilyFile, ParseFormat) {
  FamilyInstance f = parse_family_file(slurp(QASDYN_TEST_DATA "/ref.family"));
  EXPECT_EQ(f.map.components, reference().map.components);
  FamilyInstance g = parse_family_file(format_family_file(f));
  EXPECT_EQ(g.map.components, f.map.components);
  EXPECT_EQ(g.R, f.R);
  EXPECT_EQ(error_of([] { parse_family_file("vars z w t\nP z\n"); }), Errc::InputFormat);
  EXPECT_EQ(error_of([] { parse_family_file("vars z w\nP z\n"); }), Errc::InputFormat);
  EXPECT_EQ(error_of([] {
              parse_family_file("vars z w t\nP z\nQ1 w^2\nQ2 t^2\nQ3 z*w\nR w^2*t\nmap z\nmap w\nmap t\n");
            }),
            Errc::InputFormat);
}
