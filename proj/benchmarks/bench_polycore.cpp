#include <benchmark/benchmark.h>
#include <qasdyn/mapiter.hpp>
#include <qasdyn/polycore.hpp>

using namespace qasdyn;

namespace {

const std::vector<std::string> kZWT{"z", "w", "t"};

HomPoly dense(unsigned degree, long seed) {
  std::vector<Term> terms;
  for (unsigned a = 0; a <= degree; ++a) {
    for (unsigned b = 0; a + b <= degree; ++b) {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      terms.push_back({Monomial({a, b, degree - a - b}), Rational(seed % 19 - 9)});
    }
  }
  return HomPoly::from_terms(3, std::move(terms));
}

void BM_Multiply(benchmark::State& state) {
  const auto d = static_cast<unsigned>(state.range(0));
  const HomPoly a = dense(d, 1), b = dense(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_Multiply)->RangeMultiplier(2)->Range(4, 32);

void BM_GcdWithCommonFactor(benchmark::State& state) {
  const auto d = static_cast<unsigned>(state.range(0));
  const HomPoly g = dense(d, 3);
  const HomPoly a = g * dense(d, 4), b = g * dense(d, 5);
  const auto method = static_cast<GcdMethod>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(gcd(a, b, method));
}
BENCHMARK(BM_GcdWithCommonFactor)
    ->ArgsProduct({{2, 4, 8}, {static_cast<long>(GcdMethod::Heuristic), static_cast<long>(GcdMethod::Prs)}});

void BM_Compose(benchmark::State& state) {
  const auto d = static_cast<unsigned>(state.range(0));
  const HomPoly p = dense(3, 6);
  const std::vector<HomPoly> comps{dense(d, 7), dense(d, 8), dense(d, 9)};
  for (auto _ : state) benchmark::DoNotOptimize(compose(p, comps));
}
BENCHMARK(BM_Compose)->DenseRange(2, 8, 2);

void BM_ParsePrint(benchmark::State& state) {
  const std::string text = to_string(dense(static_cast<unsigned>(state.range(0)), 10), kZWT);
  for (auto _ : state) benchmark::DoNotOptimize(to_string(parse_poly(text, kZWT), kZWT));
}
BENCHMARK(BM_ParsePrint)->Arg(8)->Arg(32);

}  // namespace
