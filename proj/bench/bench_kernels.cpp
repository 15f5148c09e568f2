// Serial reference against the OpenMP kernels on the triangle scenarios.
#include <benchmark/benchmark.h>

#include "etfc/simulation.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace etfc;

ScenarioConfig scenario(int mode) {
  return mode == 0 ? support::triangle_single() : support::triangle_double();
}

struct Prepared {
  ScenarioConfig cfg;
  RunResult result;
  std::vector<double> times;

  explicit Prepared(int mode, double dt)
      : cfg(scenario(mode)), result(run(cfg)),
        times(sample_times(cfg.horizon, dt, result.triggers)) {}
};

template <bool Parallel>
void BM_SampleTrace(benchmark::State& state) {
  const Prepared p(static_cast<int>(state.range(0)), 1e-4);
  for (auto _ : state) {
    auto out = Parallel ? sample_trace_parallel(p.cfg, p.result.controller, p.result.segments, p.times)
                        : sample_trace_serial(p.cfg, p.result.controller, p.result.segments, p.times);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.times.size()));
}

template <bool Parallel>
void BM_Batch(benchmark::State& state) {
  std::vector<ScenarioConfig> cfgs;
  for (int k = 0; k < 8; ++k) {
    ScenarioConfig c = scenario(static_cast<int>(state.range(0)));
    c.horizon = 5.0;
    c.alpha = 5.0 + k;
    cfgs.push_back(c);
  }
  for (auto _ : state) {
    auto out = Parallel ? run_batch_parallel(cfgs) : run_batch_serial(cfgs);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfgs.size()));
}

BENCHMARK(BM_SampleTrace<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleTrace<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch<false>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Batch<true>)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
