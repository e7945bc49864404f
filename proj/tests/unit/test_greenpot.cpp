#include <gtest/gtest.h>
#include <qasdyn/error.hpp>
#include <qasdyn/family2.hpp>
#include <qasdyn/greenpot.hpp>
#include <qasdyn/rng.hpp>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>

using namespace qasdyn;

namespace {

const std::vector<std::string> kZWT{"z", "w", "t"};

HomPoly P(const std::string& s) { return parse_poly(s, kZWT); }

ProjMap monomial_map() { return make_map({P("z^2"), P("w^2"), P("t^2")}, kZWT); }

GreenModel monomial_model() { return GreenModel::algebraically_stable(monomial_map()); }

// The R = t^3 member of the family, with its symbolic certificate.
GreenModel family_model() {
  FamilyInstance f = build_family_map(P("z"), P("w^2"), P("t^2"), P("z*w"), P("t^3"));
  QASVerdict v = infer_qas(iterate_degrees(f.map, 3));
  EXPECT_EQ(v.kind, Stability::QAS);
  return GreenModel::quasi_stable(f.map, *v.certificate, char_poly_roots(f.spec, 256));
}

CVec random_point(Rng& rng) {
  CVec z(3);
  for (auto& c : z) c = {rng.normal(), rng.normal()};
  return z;
}

double closed_form(const CVec& z) {
  double m = -INFINITY;
  for (const auto& c : z) m = std::max(m, std::log(std::abs(c)));
  return m;
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

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(GreenEval, MonomialClosedForm) {
  GreenModel m = monomial_model();
  EXPECT_NEAR(green_eval(m, {2.0, 1.0, 1.0}).u, std::log(2.0), 1e-12);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const CVec z = random_point(rng);
    EXPECT_NEAR(green_eval(m, z).u, closed_form(z), 1e-9);
  }
}

TEST(GreenEval, Homogeneity) {
  Rng rng(2);
  for (const GreenModel& m : {monomial_model(), family_model()}) {
    for (int i = 0; i < 100; ++i) {
      const CVec z = random_point(rng);
      const std::complex<double> s(rng.normal() * 3, rng.normal() * 3);
      CVec sz = z;
      for (auto& c : sz) c *= s;
      EXPECT_NEAR(green_eval(m, sz).u - std::log(std::abs(s)), green_eval(m, z).u, 1e-8);
    }
  }
}

TEST(GreenEval, DivisorAndIndeterminacy) {
  GreenModel m = family_model();
  // H = z: the orbit divides by H(w_0) at step n0 + 1 = 2.
  try {
    green_eval(m, {0.0, 1.0, 2.0});
    ADD_FAILURE() << "expected OrbitHitDivisor";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OrbitHitDivisor);
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos);
  }
  EXPECT_EQ(error_of([&] { green_eval(m, {1.0, 1.0, 1.0}); }), Errc::OrbitHitIndeterminacy);
  EXPECT_EQ(error_of([&] { green_eval(m, {0.0, 0.0, 0.0}); }), Errc::ZeroVector);
  EXPECT_EQ(error_of([&] { green_eval(m, {1.0, 2.0}); }), Errc::ArityMismatch);
}

TEST(GreenEval, NotConvergedOnlyWithTolerance) {
  GreenModel m = family_model();
  const CVec z{0.3, -1.2, 0.7};
  EXPECT_NO_THROW(green_eval(m, z, {3, 53, 0.0}));
  EXPECT_EQ(error_of([&] { green_eval(m, z, {3, 53, 1e-12}); }), Errc::NotConverged);
  EXPECT_NO_THROW(green_eval(m, z, {40, 53, 1e-12}));
}

TEST(GreenEval, IncrementsDecayGeometrically) {
  GreenModel m = family_model();
  const double lam = m.lambda().to_double();
  const double r = lam / 1.05;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    GreenResult g = green_eval(m, random_point(rng));
    ASSERT_EQ(g.history.size(), 40u);
    double early = 0;
    for (std::size_t n = 1; n <= 10; ++n) early = std::max(early, g.history[n - 1] * std::pow(r, n));
    for (std::size_t n = 11; n <= 40; ++n) {
      if (g.history[n - 1] < 1e-14) break;
      EXPECT_LE(g.history[n - 1] * std::pow(r, n), 10 * early) << n;
    }
  }
}

TEST(GreenEval, MultiprecisionAgreesWithDouble) {
  GreenModel m = family_model();
  Rng rng(5);
  for (int i = 0; i < 5; ++i) {
    const CVec z = random_point(rng);
    EXPECT_NEAR(green_eval(m, z, {40, 128, 0}).u, green_eval(m, z).u, 1e-12);
  }
}

TEST(GreenEval, DegreesMatchRecurrence) {
  GreenModel m = family_model();
  EXPECT_EQ(m.degrees(40), extend_degrees({3, 1, 1}, 40));
  EXPECT_EQ(monomial_model().degrees(10), extend_degrees({2, 0, 1}, 10));
}

TEST(FunctionalEquation, MonomialIsExact) {
  GreenModel m = monomial_model();
  Rng rng(6);
  for (int i = 0; i < 100; ++i) EXPECT_LT(functional_eq_residual(m, random_point(rng)), 1e-9);
}

TEST(FunctionalEquation, MassBalance) {
  // d = lambda + ((d - lambda) / h) * h at unit mass.
  SpectralReport rep = char_poly_roots({3, 1, 1}, 256);
  const BigFloat d(3L, 256), h(1L, 256);
  EXPECT_LT(abs(d - (rep.lambda + (d - rep.lambda) / h * h)), ldexp_one(-250, 256));
}

TEST(FunctionalEquation, FamilyResidualShrinksWithDepth) {
  GreenModel m = family_model();
  Rng rng(7);
  std::vector<double> r10, r40;
  for (int i = 0; i < 200; ++i) {
    const CVec z = random_point(rng);
    r10.push_back(functional_eq_residual(m, z, {10, 53, 0}));
    r40.push_back(functional_eq_residual(m, z, {40, 53, 0}));
  }
  EXPECT_LT(median(r40), median(r10));
  EXPECT_LT(median(r40), 1e-12);
}

TEST(FunctionalEquation, NonIncreasingAsDepthDoubles) {
  GreenModel m = family_model();
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const CVec z = random_point(rng);
    double prev = functional_eq_residual(m, z, {5, 53, 0});
    for (std::size_t n : {10u, 20u, 40u}) {
      const double cur = functional_eq_residual(m, z, {n, 53, 0});
      EXPECT_LE(cur, prev + 1e-13);
      prev = cur;
    }
  }
}

TEST(Telescope, DepthOneIsFunctionalEquation) {
  GreenModel m = family_model();
  Rng rng(9);
  for (int i = 0; i < 20; ++i) {
    const CVec z = random_point(rng);
    EXPECT_NEAR(telescope_residual(m, z, 1), functional_eq_residual(m, z) / m.lambda().to_double(), 1e-12);
  }
}

TEST(Telescope, FamilyAndMonomial) {
  GreenModel fam = family_model();
  GreenModel mono = monomial_model();
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const CVec z = random_point(rng);
    EXPECT_LT(telescope_residual(fam, z, 3), 1e-3);
    EXPECT_LT(telescope_residual(mono, z, 3), 1e-9);
  }
  const CVec z = random_point(rng);
  EXPECT_LT(telescope_residual(fam, z, 6, {40, 192, 0}), 1e-12);
  EXPECT_EQ(error_of([&] { telescope_residual(fam, z, kMaxTelescopeDepth + 1); }), Errc::AmplificationOverflow);
  EXPECT_EQ(error_of([&] { telescope_residual(fam, z, 0); }), Errc::InvalidArgument);
}

TEST(Grid, ConsistencyAndStatus) {
  GreenModel m = family_model();
  Slice s{{0.0, 1.0, 0.5}, {1.0, 0.0, 0.0}, {0.0, 0.0, {0.0, 1.0}}, -1, 1, -1, 1};
  GreenGrid g = grid_sample(m, s, 5, {}, 1);
  ASSERT_EQ(g.values.size(), 25u);
  // x = 0 is the middle column; those nodes lie on {z = 0}.
  EXPECT_EQ(g.x_at(2), 0.0);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(g.status_at(2, j), NodeStatus::HitDivisor);
    EXPECT_TRUE(std::isnan(g.value(2, j)));
  }
  Slice shifted = s;
  shifted.base = {0.3, 1.0, 0.5};
  GreenGrid h = grid_sample(m, shifted, 5, {}, 1);
  EXPECT_EQ(h.value(2, 2), green_eval(m, shifted.base).u);
  EXPECT_EQ(h.certificate, m.digest());

  std::ostringstream csv;
  write_csv(h, csv);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
  EXPECT_EQ(text.substr(0, 13), "x,y,u,status\n");
}

TEST(Grid, WorkerCountDoesNotChangeOutput) {
  GreenModel m = family_model();
  Slice s{{0.2, 1.0, 0.5}, {1.0, 0.0, 0.0}, {0.0, {0.0, 1.0}, 0.0}, -2, 2, -2, 2};
  GreenGrid a = grid_sample(m, s, 12, {}, 1);
  GreenGrid b = grid_sample(m, s, 12, {}, 3);
  std::ostringstream ca, cb;
  write_csv(a, ca);
  write_csv(b, cb);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Grid, Errors) {
  GreenModel m = monomial_model();
  Slice dep{{1.0, 1.0, 1.0}, {1.0, 0.0, 0.0}, {-2.0, 0.0, 0.0}, -1, 1, -1, 1};
  EXPECT_EQ(error_of([&] { grid_sample(m, dep, 4); }), Errc::InvalidArgument);
  Slice ok{{1.0, 1.0, 1.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, -1, 1, -1, 1};
  EXPECT_EQ(error_of([&] { grid_sample(m, ok, 1); }), Errc::InvalidArgument);
  Slice small{{1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}, -1, 1, -1, 1};
  EXPECT_EQ(error_of([&] { grid_sample(m, small, 4); }), Errc::ArityMismatch);
}

TEST(Grid, PgmAndSidecar) {
  GreenModel m = family_model();
  Slice s{{0.0, 1.0, 0.5}, {1.0, 0.0, 0.0}, {0.0, 0.0, {0.0, 1.0}}, -1, 1, -1, 1};
  GreenGrid g = grid_sample(m, s, 5, {}, 1);
  std::ostringstream pgm;
  write_pgm(g, pgm);
  std::istringstream in(pgm.str());
  std::string magic;
  std::size_t w, h, maxval;
  in >> magic >> w >> h >> maxval;
  EXPECT_EQ(magic, "P2");
  EXPECT_EQ(w, 5u);
  EXPECT_EQ(h, 5u);
  EXPECT_EQ(maxval, 65535u);
  std::vector<long> px;
  for (long v; in >> v;) px.push_back(v);
  ASSERT_EQ(px.size(), 25u);
  EXPECT_EQ(*std::max_element(px.begin(), px.end()), 65535);
  for (std::size_t k = 0; k < 25; ++k) EXPECT_EQ(px[k] == 0, g.status[k] != NodeStatus::OK);

  const auto j = nlohmann::json::parse(grid_sidecar_json(g));
  EXPECT_EQ(j["certificate_digest"], m.digest());
  EXPECT_EQ(j["depth"], 40);
  EXPECT_EQ(j["resolution"], 5);
  EXPECT_LE(j["min"].get<double>(), j["max"].get<double>());
}

TEST(Laplacian, SyntheticGrids) {
  GreenGrid g;
  g.slice = {{}, {}, {}, -1, 1, -2, 2};
  g.resolution = 21;
  g.status.assign(21 * 21, NodeStatus::OK);
  g.values.resize(21 * 21);
  auto fill = [&](auto f) {
    for (std::size_t j = 0; j < 21; ++j) {
      for (std::size_t i = 0; i < 21; ++i) g.values[j * 21 + i] = f(g.x_at(i), g.y_at(j));
    }
  };
  fill([](double x, double y) { return 3 * x - 2 * y + 1; });
  LaplacianField lf = laplacian_diagnostic(g);
  for (std::size_t j = 1; j < 20; ++j) {
    for (std::size_t i = 1; i < 20; ++i) EXPECT_NEAR(lf.values[j * 21 + i], 0.0, 1e-9);
  }
  EXPECT_TRUE(std::isnan(lf.values[0]));
  fill([](double x, double y) { return x * x + y * y; });
  lf = laplacian_diagnostic(g);
  EXPECT_NEAR(lf.values[10 * 21 + 10], 4.0, 1e-9);

  g.status.assign(21 * 21, NodeStatus::HitDivisor);
  EXPECT_EQ(error_of([&] { laplacian_diagnostic(g); }), Errc::InsufficientOKRegion);
}

TEST(Laplacian, MonomialCornerLocus) {
  // u = max(0, log|x + iy|, log 0.5) on this slice; it bends along |x + iy| = 1.
  GreenModel m = monomial_model();
  Slice s{{1.0, 0.0, 0.5}, {0.0, 1.0, 0.0}, {0.0, {0.0, 1.0}, 0.0}, -2, 2, -2, 2};
  GreenGrid g = grid_sample(m, s, 41, {}, 2);
  LaplacianField lf = laplacian_diagnostic(g);
  double ring = 0, away = 0;
  int nring = 0, naway = 0;
  for (std::size_t j = 1; j < 40; ++j) {
    for (std::size_t i = 1; i < 40; ++i) {
      const double r = std::hypot(g.x_at(i), g.y_at(j));
      const double v = lf.values[j * 41 + i];
      if (std::isnan(v)) continue;
      if (std::fabs(r - 1) < 0.1) {
        ring += v;
        ++nring;
      } else if (r < 0.7 || r > 1.4) {
        away += v;
        ++naway;
      }
    }
  }
  ASSERT_GT(nring, 0);
  ASSERT_GT(naway, 0);
  EXPECT_GT(ring / nring, 10 * (away / naway));
}
