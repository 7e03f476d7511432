#include <benchmark/benchmark.h>

#include "mot/dataio.hpp"
#include "mot/stage1.hpp"

namespace {

mot::SequenceBundle crowded(int identities) {
  mot::SynthConfig cfg;
  cfg.seed = 42;
  cfg.num_identities = identities;
  cfg.frame_count = 300;
  cfg.fp_rate = 1.0;
  cfg.occlusion_count = identities / 2;
  return mot::generate(cfg);
}

void tracklets_by_crowd(benchmark::State& state) {
  const mot::SequenceBundle bundle = crowded(static_cast<int>(state.range(0)));
  mot::Stage1Config cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mot::track_sequence(bundle, cfg));
  }
  state.SetComplexityN(state.range(0));
}

// A tight threshold forbids most pairs, so the solver sees sparser problems
// but the tracker manages far more concurrent tracklets.
void tracklets_by_threshold(benchmark::State& state) {
  const mot::SequenceBundle bundle = crowded(16);
  mot::Stage1Config cfg;
  cfg.th_c = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mot::track_sequence(bundle, cfg));
  }
}

}  // namespace

BENCHMARK(tracklets_by_crowd)
    ->RangeMultiplier(2)
    ->Range(4, 64)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK(tracklets_by_threshold)
    ->DenseRange(2, 7, 1)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
