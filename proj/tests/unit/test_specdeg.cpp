#include <gtest/gtest.h>
#include <qasdyn/error.hpp>
#include <qasdyn/specdeg.hpp>

#include <cmath>

#include "gen.hpp"

using namespace qasdyn;

namespace {

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

std::vector<long> as_longs(const std::vector<Integer>& v) {
  std::vector<long> out;
  for (const auto& x : v) out.push_back(x.get_si());
  return out;
}

// Naive recurrence with an explicit zero for negative indices.
std::vector<Integer> oracle_degrees(const RecurrenceSpec& s, std::size_t n) {
  std::vector<Integer> d;
  auto at = [&](long i) -> Integer { return i < 0 ? Integer(0) : d[static_cast<std::size_t>(i)]; };
  for (long i = 0; i <= static_cast<long>(n); ++i) {
    if (i == 0) {
      d.emplace_back(1);
    } else {
      d.push_back(Integer(s.d) * at(i - 1) - Integer(s.h) * at(i - static_cast<long>(s.n0) - 1));
    }
  }
  return d;
}

const RecurrenceSpec kFib{3, 1, 1};
const BigFloat kSqrt5 = sqrt(BigFloat(5L, 512));
const BigFloat kGolden2 = (BigFloat(3L, 512) + kSqrt5) / BigFloat(2L, 512);

}  // namespace

TEST(ExtendDegrees, Examples) {
  EXPECT_EQ(as_longs(extend_degrees(kFib, 5)), (std::vector<long>{1, 3, 8, 21, 55, 144}));
  EXPECT_EQ(as_longs(extend_degrees({2, 0, 1}, 4)), (std::vector<long>{1, 2, 4, 8, 16}));
  EXPECT_EQ(as_longs(extend_degrees(kFib, 0)), (std::vector<long>{1}));
  // First step past the lag uses d_0 = 1.
  EXPECT_EQ(as_longs(extend_degrees({3, 2, 2}, 3)), (std::vector<long>{1, 3, 9, 25}));
}

TEST(ExtendDegrees, MatchesNaiveRecurrence) {
  testgen::Gen g(5);
  for (int i = 0; i < 200; ++i) {
    RecurrenceSpec s{static_cast<unsigned>(g.range(2, 6)), static_cast<unsigned>(g.range(0, 4)),
                     static_cast<unsigned>(g.range(1, 4))};
    const auto expect = oracle_degrees(s, 30);
    bool positive = true;
    for (const auto& x : expect) positive = positive && x > 0;
    if (positive) {
      EXPECT_EQ(extend_degrees(s, 30), expect);
    } else {
      EXPECT_EQ(error_of([&] { extend_degrees(s, 30); }), Errc::NonPositiveDegree);
    }
  }
}

TEST(ExtendDegrees, Errors) {
  EXPECT_EQ(error_of([] { extend_degrees({2, 5, 1}, 5); }), Errc::NonPositiveDegree);
  EXPECT_EQ(error_of([] { extend_degrees({1, 0, 1}, 5); }), Errc::InvalidArgument);
  EXPECT_EQ(error_of([] { extend_degrees({3, 1, 0}, 5); }), Errc::InvalidArgument);
}

TEST(CharPoly, Coefficients) {
  EXPECT_EQ(as_longs(char_poly(kFib)), (std::vector<long>{1, -3, 1}));
  EXPECT_EQ(as_longs(char_poly({4, 3, 2})), (std::vector<long>{3, 0, -4, 1}));
}

TEST(CharPolyRoots, GoldenExample) {
  SpectralReport rep = char_poly_roots(kFib, 256);
  EXPECT_EQ(rep.r, 1u);
  const BigFloat err = abs(rep.lambda - kGolden2.with_precision(256));
  EXPECT_LT(err, ldexp_one(-128, 256));
  EXPECT_LE(err, rep.error_bound + ldexp_one(-250, 256));
  EXPECT_NEAR(rep.lambda.to_double(), 2.6180339887, 1e-10);
  // rho = ((3 - sqrt5)/2) / ((3 + sqrt5)/2)
  const BigFloat rho = (BigFloat(3L, 512) - kSqrt5) / (BigFloat(3L, 512) + kSqrt5);
  EXPECT_LT(abs(rep.rho - rho.with_precision(256)), ldexp_one(-120, 256));
  EXPECT_NEAR(rep.rho.to_double(), 0.1459, 1e-4);
  EXPECT_EQ(rep.roots.size(), 2u);
  EXPECT_LT(rep.error_bound, ldexp_one(-128, 256));
}

TEST(CharPolyRoots, TrivialAndDegenerate) {
  SpectralReport as = char_poly_roots({2, 0, 1}, 128);
  EXPECT_EQ(as.r, 1u);
  EXPECT_LT(abs(as.lambda - BigFloat(2L, 128)), ldexp_one(-60, 128));
  EXPECT_TRUE(as.rho < ldexp_one(-60, 128));

  EXPECT_EQ(error_of([] { char_poly_roots({2, 1, 1}, 128); }), Errc::DegenerateLambda);
  EXPECT_EQ(error_of([] { char_poly_roots(kFib, 32); }), Errc::InvalidArgument);
}

TEST(CharPolyRoots, DoubleRoot) {
  // t^2 - 4t + 4 = (t - 2)^2, d_n = (n + 1) 2^n.
  SpectralReport rep = char_poly_roots({4, 4, 1}, 128);
  EXPECT_EQ(rep.r, 2u);
  EXPECT_NEAR(rep.lambda.to_double(), 2.0, 1e-30);
  ASSERT_EQ(rep.q_fit.size(), 2u);
  EXPECT_NEAR(rep.q_fit[0].to_double(), 1.0, 1e-20);
  EXPECT_NEAR(rep.q_fit[1].to_double(), 1.0, 1e-20);
  AsymptoticsReport a = check_asymptotics(extend_degrees({4, 4, 1}, 40), rep);
  EXPECT_LT(a.max_residual.to_double(), 1e-20);
}

TEST(CharPolyRoots, RootsSatisfyPolynomialAndBoundGap) {
  testgen::Gen g(77);
  int checked = 0;
  for (int i = 0; i < 60; ++i) {
    RecurrenceSpec s{static_cast<unsigned>(g.range(3, 7)), static_cast<unsigned>(g.range(0, 3)),
                     static_cast<unsigned>(g.range(1, 5))};
    SpectralReport rep = char_poly_roots(s, 128);
    ++checked;
    const long prec = 128;
    for (std::size_t k = 0; k < rep.roots.size(); ++k) {
      // Residual of P at the root against a Lipschitz-style bound.
      Cx<BigFloat> acc(BigFloat(0.0, prec), BigFloat(0.0, prec));
      for (std::size_t j = rep.charpoly.size(); j-- > 0;) {
        acc = acc * rep.roots[k] + Cx<BigFloat>(BigFloat(rep.charpoly[j], prec), BigFloat(0.0, prec));
      }
      EXPECT_LT(acc.modulus().to_double(), 1e-12) << s.d << " " << s.h << " " << s.n0;
      if (!(abs(rep.roots[k].re - rep.lambda) <= rep.error_bound && abs(rep.roots[k].im) <= rep.error_bound)) {
        EXPECT_LE(rep.roots[k].modulus(), rep.rho * rep.lambda + rep.error_bound);
      }
    }
    EXPECT_GT(rep.lambda.to_double(), 1.0);
    EXPECT_LT(rep.rho.to_double(), 1.0);
  }
  EXPECT_EQ(checked, 60);
}

TEST(CharPolyRoots, NegativeP1ImpliesLambdaAboveOne) {
  // P(1) = 1 - d + h < 0 forces a real root above 1.
  for (unsigned d = 2; d <= 6; ++d) {
    for (unsigned h = 0; h + 1 < d; ++h) {
      for (unsigned n0 = 1; n0 <= 3; ++n0) {
        SpectralReport rep = char_poly_roots({d, h, n0}, 96);
        EXPECT_GT(rep.lambda.to_double(), 1.0) << d << " " << h << " " << n0;
      }
    }
  }
}

TEST(CharPolyRoots, LambdaMatchesRootOfDegrees) {
  SpectralReport rep = char_poly_roots(kFib, 128);
  const auto degs = extend_degrees(kFib, 200);
  double prev_gap = 1e9;
  for (std::size_t n : {20u, 50u, 100u, 200u}) {
    const double root = std::exp(std::log(degs[n].get_d()) / static_cast<double>(n));
    const double gap = std::fabs(root - rep.lambda.to_double());
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  // The gap decays like log(Q) / n.
  EXPECT_LT(prev_gap, 3e-3);
}

TEST(Asymptotics, GoldenConstant) {
  SpectralReport rep = char_poly_roots(kFib, 256);
  ASSERT_EQ(rep.q_fit.size(), 1u);
  EXPECT_NEAR(rep.q_fit[0].to_double(), 1.1708204, 1e-7);
  // Independent oracle: 144 / lambda^5 is already within rho^5 of the limit.
  const double approx = 144.0 / std::pow(kGolden2.to_double(), 5);
  EXPECT_NEAR(rep.q_fit[0].to_double(), approx, 1e-4);

  const auto degs = extend_degrees(kFib, 60);
  AsymptoticsReport a = check_asymptotics(degs, rep);
  ASSERT_EQ(a.residuals.size(), degs.size());
  for (std::size_t n = 1; n + 1 < a.residuals.size(); ++n) {
    if (a.residuals[n] < ldexp_one(-200, 256)) break;
    EXPECT_LE(a.residuals[n + 1], rep.rho * a.residuals[n] * BigFloat(1.000001, 256)) << n;
  }
  EXPECT_LT(a.residuals.back().to_double(), 1e-40);
}

TEST(Asymptotics, AlgebraicallyStableIsExact) {
  SpectralReport rep = char_poly_roots({3, 0, 2}, 256);
  AsymptoticsReport a = check_asymptotics(extend_degrees({3, 0, 2}, 30), rep);
  EXPECT_LT(a.max_residual, ldexp_one(-120, 256));
}

TEST(Asymptotics, Errors) {
  SpectralReport rep = char_poly_roots(kFib, 128);
  EXPECT_EQ(error_of([&] { check_asymptotics(extend_degrees(kFib, 5), rep); }), Errc::InsufficientData);
  EXPECT_EQ(error_of([&] { check_asymptotics(extend_degrees({3, 0, 1}, 12), rep); }), Errc::InvalidArgument);
}

TEST(GrowthBounds, GoldenLongRange) {
  SpectralReport rep = char_poly_roots(kFib, 128);
  const auto degs = extend_degrees(kFib, 10000);
  GrowthBounds g = check_growth_bounds(degs, rep.lambda);
  EXPECT_TRUE(g.c1.is_finite());
  EXPECT_TRUE(g.c2.is_finite());
  EXPECT_GT(g.c1.to_double(), 0.0);
  // Partial sums approach lambda / (lambda - 1) from below.
  const double lam = rep.lambda.to_double();
  EXPECT_NEAR(g.c2.to_double(), lam / (lam - 1.0), 1e-9);
}

TEST(GrowthBounds, AlgebraicallyStable) {
  SpectralReport rep = char_poly_roots({2, 0, 1}, 128);
  GrowthBounds g = check_growth_bounds(extend_degrees({2, 0, 1}, 20), BigFloat(2L, 128));
  EXPECT_TRUE(g.c1.is_zero());
  EXPECT_LT(abs(rep.lambda - BigFloat(2L, 128)).to_double(), 1e-30);
  EXPECT_EQ(error_of([] { check_growth_bounds(extend_degrees({2, 0, 1}, 3), BigFloat(2L, 128)); }),
            Errc::InsufficientData);
}

TEST(SnIdentity, Vanishes) {
  const long prec = 213;  // 64 decimal digits
  SpectralReport rep = char_poly_roots(kFib, prec);
  const auto degs = extend_degrees(kFib, 20);
  EXPECT_LT(check_sn_identity(kFib, rep.lambda, degs, 20).to_double(), 1e-9);
  EXPECT_LT(check_sn_identity(kFib, rep.lambda, degs, 20).to_double(), 1e-50);
  EXPECT_TRUE(check_sn_identity({2, 0, 1}, BigFloat(2L, prec), extend_degrees({2, 0, 1}, 20), 20).is_zero());
  EXPECT_EQ(error_of([&] { check_sn_identity(kFib, rep.lambda, degs, 21); }), Errc::InsufficientData);
}

TEST(SnIdentity, HoldsAcrossSpecs) {
  testgen::Gen g(11);
  for (int i = 0; i < 40; ++i) {
    RecurrenceSpec s{static_cast<unsigned>(g.range(3, 6)), static_cast<unsigned>(g.range(0, 2)),
                     static_cast<unsigned>(g.range(1, 4))};
    SpectralReport rep = char_poly_roots(s, 256);
    const auto degs = extend_degrees(s, 40);
    EXPECT_LT(check_sn_identity(s, rep.lambda, degs, 40).to_double(), 1e-30) << s.d << " " << s.h << " " << s.n0;
    // For n <= n0 the closed form is exact up to rounding.
    EXPECT_LT(check_sn_identity(s, rep.lambda, degs, s.n0).to_double(), 1e-60);
  }
}
