#include <benchmark/benchmark.h>

#include "hlscong/dataset.hpp"
#include "hlscong/depgraph.hpp"
#include "hlscong/features.hpp"
#include "hlscong/gbrt.hpp"
#include "hlscong/rng.hpp"
#include "hlscong/synthoracle.hpp"

using namespace hlscong;

namespace {

const SynthDesign& Design() {
  static const SynthDesign d = [] {
    GenConfig c;
    c.seed = 3;
    return SynthesizeDesign(c);
  }();
  return d;
}

void BM_BuildGraph(benchmark::State& state) {
  const DesignBundle& b = Design().bundle;
  for (auto _ : state) benchmark::DoNotOptimize(BuildGraph(b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.operations().size()));
}
BENCHMARK(BM_BuildGraph);

void BM_ExtractAll(benchmark::State& state) {
  const DesignBundle& b = Design().bundle;
  const DepGraph g = BuildGraph(b);
  for (auto _ : state) benchmark::DoNotOptimize(ExtractAll(g, b));
  state.SetItemsProcessed(state.iterations() * g.size());
}
BENCHMARK(BM_ExtractAll);

void BM_SynthesizeDesign(benchmark::State& state) {
  GenConfig c;
  for (auto _ : state) {
    c.seed++;
    benchmark::DoNotOptimize(SynthesizeDesign(c));
  }
}
BENCHMARK(BM_SynthesizeDesign);

void BM_FitGbrt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Matrix x(n, 40);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 40; ++j) x(i, j) = rng.Normal();
    y[i] = x(i, 0) * 3 + (x(i, 1) > 0 ? 5 : 0) + rng.Normal();
  }
  GbrtParams p;
  p.n_estimators = 50;
  for (auto _ : state) benchmark::DoNotOptimize(FitGbrt(x, y, p));
}
BENCHMARK(BM_FitGbrt)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
