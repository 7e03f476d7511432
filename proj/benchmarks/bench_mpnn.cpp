#include <benchmark/benchmark.h>

#include <vector>

#include "mot/dataio.hpp"
#include "mot/model.hpp"
#include "mot/stage1.hpp"
#include "mot/tgraph.hpp"

namespace {

struct Fixture {
  std::vector<mot::Tracklet> tracklets;
  mot::TrackletGraph graph;
  mot::MpnnConfig cfg;
  mot::ModelParams params = mot::ModelParams::init(cfg, 3);
  double fps = 25.0;

  explicit Fixture(int identities) {
    mot::SynthConfig synth;
    synth.seed = 42;
    synth.num_identities = identities;
    synth.frame_count = 200;
    synth.occlusion_count = identities;
    const mot::SequenceBundle bundle = mot::generate(synth);
    fps = bundle.fps;
    mot::Stage1Config s1;
    s1.th_c = 0.3;  // fragment hard so the graph has real work
    tracklets = mot::track_sequence(bundle, s1);
    graph = mot::build_graph(tracklets, mot::GraphConfig{}, fps);
  }
};

void graph_construction(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mot::build_graph(fx.tracklets, mot::GraphConfig{}, fx.fps));
  }
  state.SetComplexityN(static_cast<std::int64_t>(fx.tracklets.size()));
}

void forward_scoring(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mot::score_edges(fx.graph, fx.params, fx.cfg, 0));
  }
  state.SetComplexityN(static_cast<std::int64_t>(fx.graph.edges.size()));
}

void message_pass_depth(benchmark::State& state) {
  Fixture fx(12);
  fx.cfg.l_mp = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mot::score_edges(fx.graph, fx.params, fx.cfg, 0));
  }
}

}  // namespace

BENCHMARK(graph_construction)
    ->RangeMultiplier(2)
    ->Range(4, 32)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK(forward_scoring)
    ->RangeMultiplier(2)
    ->Range(4, 32)
    ->Unit(benchmark::kMillisecond)
    ->Complexity();
BENCHMARK(message_pass_depth)
    ->DenseRange(2, 12, 2)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
