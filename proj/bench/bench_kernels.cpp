// Serial reference vs OpenMP kernels. Results are bit-identical by
// construction; this only measures time.

#include <benchmark/benchmark.h>

#include "tailagg/montecarlo.hpp"
#include "tailagg/pipeline.hpp"

using namespace tailagg;

namespace {

Execution mode(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_SimulateAggregate(benchmark::State& state) {
  const MarginPair m{{1.0, 0.5}, {1.0, 0.5}};
  const auto spec = CopulaSpec::logistic(0.5);
  for (auto _ : state) {
    auto s = simulate_aggregate(m, spec, Weights(), 1'000'000, 1, {16, mode(state)});
    benchmark::DoNotOptimize(s.values.data());
  }
  state.SetItemsProcessed(state.iterations() * 1'000'000);
}

const GridDataset& dataset() {
  static const GridDataset ds = [] {
    SyntheticOptions so;
    so.n_times = 20'000;
    so.margin = GpdParams(1, -0.2);
    so.copula = CopulaSpec::inverted_logistic(0.5);
    so.seed = 1;
    return make_synthetic(so);
  }();
  return ds;
}

void BM_RunStudy(benchmark::State& state) {
  const auto& ds = dataset();
  StudyOptions o;
  o.n_boot = 100;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_study(ds, default_adjacency(ds), o));
}

void BM_RunStudyReference(benchmark::State& state) {
  const auto& ds = dataset();
  StudyOptions o;
  o.n_boot = 100;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(run_study_reference(ds, default_adjacency(ds), o));
}

}  // namespace

// Argument 0 = serial, 1 = parallel.
BENCHMARK(BM_SimulateAggregate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunStudy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunStudyReference)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
