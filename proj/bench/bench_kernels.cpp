// Serial reference loops against the OpenMP kernels on the oscillator
// benchmark at delta = 0.1.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "etatest/pipeline.hpp"

using namespace etatest;

namespace {

struct Fixture {
  Experiment ex;
  Dataset data;
  NeighborIndex index;
  LipschitzField field;
  VerifyOptions options;
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[n];
  if (!slot) {
    auto ex = make_experiment("osc-stable");
    Dataset data = collect_experiment(ex, {n, 0, 0.01});
    NeighborIndex index(data, 0.1);
    LipschitzField field = estimate_all(data, index, 0.1, 1.0);
    VerifyOptions options;
    options.eq_tol = default_eq_tol(ex.bounds);
    slot.reset(new Fixture{std::move(ex), std::move(data), std::move(index), std::move(field), options});
  }
  return *slot;
}

void BM_LipschitzSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::estimate_all(f.data, f.index, 0.1, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LipschitzParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_all(f.data, f.index, 0.1, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EtaTestSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reference::eta_test(f.data, f.index, f.ex.policy, f.ex.lyapunov, f.field, f.options));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EtaTestParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(eta_test(f.data, f.index, f.ex.policy, f.ex.lyapunov, f.field, f.options));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_LipschitzSerial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LipschitzParallel)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EtaTestSerial)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EtaTestParallel)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
