#include <benchmark/benchmark.h>

#include "mot/assignment.hpp"
#include "mot/rng.hpp"

namespace {

mot::CostMatrix random_costs(std::size_t n, std::uint64_t seed) {
  mot::Rng rng(seed);
  mot::CostMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (rng.uniform01() >= 0.2) m.at(r, c) = rng.uniform(0.0, 10.0);
    }
  }
  return m;
}

void dense_square(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const mot::CostMatrix costs = random_costs(n, 7 + n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mot::solve_assignment(costs));
  }
  state.SetComplexityN(state.range(0));
}

// Tall matrices mimic a frame with many detections and few live tracks.
void rectangular(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  mot::Rng rng(11);
  mot::CostMatrix costs(n, n / 4 + 1);
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      costs.at(r, c) = rng.uniform(0.0, 1.0);
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mot::solve_assignment(costs));
  }
}

}  // namespace

BENCHMARK(dense_square)
    ->RangeMultiplier(2)
    ->Range(8, 256)
    ->Unit(benchmark::kMicrosecond)
    ->Complexity();
BENCHMARK(rectangular)->RangeMultiplier(2)->Range(16, 256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
