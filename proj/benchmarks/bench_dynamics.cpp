#include <benchmark/benchmark.h>
#include <qasdyn/family2.hpp>
#include <qasdyn/greenpot.hpp>
#include <qasdyn/mapiter.hpp>
#include <qasdyn/specdeg.hpp>

using namespace qasdyn;

namespace {

const std::vector<std::string> kZWT{"z", "w", "t"};

FamilyInstance reference() {
  auto p = [](const char* s) { return parse_poly(s, kZWT); };
  return build_family_map(p("z"), p("w^2"), p("t^2"), p("z*w"), p("t^3"));
}

void BM_IterateDegrees(benchmark::State& state) {
  const ProjMap f = reference().map;
  for (auto _ : state) benchmark::DoNotOptimize(iterate_degrees(f, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_IterateDegrees)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_CharPolyRoots(benchmark::State& state) {
  const RecurrenceSpec spec{3, 1, static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(char_poly_roots(spec, state.range(1)));
}
BENCHMARK(BM_CharPolyRoots)->ArgsProduct({{1, 4, 16}, {128, 512}})->Unit(benchmark::kMicrosecond);

void BM_Preflight(benchmark::State& state) {
  const FamilyInstance inst = reference();
  for (auto _ : state) benchmark::DoNotOptimize(preflight(inst, 128, 20, 1));
}
BENCHMARK(BM_Preflight)->Unit(benchmark::kMillisecond);

GreenModel model() {
  const FamilyInstance inst = reference();
  const QASVerdict v = infer_qas(iterate_degrees(inst.map, 3));
  return GreenModel::quasi_stable(inst.map, *v.certificate, char_poly_roots(inst.spec, 256));
}

void BM_GreenEval(benchmark::State& state) {
  const GreenModel m = model();
  const CVec z{{0.3, 0.1}, {-1.2, 0.5}, {0.7, 0.0}};
  const GreenOptions opt{40, state.range(0), 0};
  for (auto _ : state) benchmark::DoNotOptimize(green_eval(m, z, opt));
}
BENCHMARK(BM_GreenEval)->Arg(53)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_GridSample(benchmark::State& state) {
  const GreenModel m = model();
  const Slice s{{0.2, 1.0, 0.5}, {1.0, 0.0, 0.0}, {0.0, {0.0, 1.0}, 0.0}, -2, 2, -2, 2};
  const auto res = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_sample(m, s, res, {}, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(res * res));
}
BENCHMARK(BM_GridSample)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
