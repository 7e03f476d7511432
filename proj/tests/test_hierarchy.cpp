#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mot/dataio.hpp"
#include "mot/gtmatch.hpp"
#include "mot/hierarchy.hpp"
#include "mot/metrics.hpp"
#include "mot/stage1.hpp"

using namespace mot;

namespace {

Detection det(int frame, double x, double y, double conf = 0.9) {
  Detection d;
  d.frame = frame;
  d.box = BBox{x, y, 10, 12};
  d.confidence = conf;
  d.embedding = std::vector<double>{1.0, 0.0};
  return d;
}

Tracklet span(int id, int start, int end, double x = 0.0) {
  std::vector<Detection> dets;
  for (int f = start; f <= end; ++f) dets.push_back(det(f, x, 0.0));
  return Tracklet(id, dets);
}

// Graph over explicit nodes and edges; features left empty (rounding and
// merging never look at them).
TrackletGraph bare_graph(std::vector<Tracklet> nodes,
                         std::vector<GraphEdge> edges) {
  TrackletGraph g;
  g.nodes = std::move(nodes);
  g.edges = std::move(edges);
  return g;
}

}  // namespace

TEST_CASE("rounding walks scores downward and keeps chains vertex-disjoint") {
  const auto g = bare_graph(
      {span(1, 1, 3), span(2, 5, 7), span(3, 9, 11), span(4, 13, 15)},
      {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
  const std::vector<double> scores{0.9, 0.85, 0.8, 0.7};

  const MergeDecision d = round_edges(g, scores, 0.5);
  REQUIRE(d.accepted.size() == 3);
  CHECK(d.accepted[0].src == 0);  // 0.9 first
  CHECK(d.accepted[0].dst == 1);
  CHECK(d.accepted[1].src == 1);  // 0.85 conflicts on source, 0.8 fits
  CHECK(d.accepted[1].dst == 2);
  CHECK(d.accepted[2].src == 2);
  CHECK(d.accepted[2].dst == 3);
  CHECK(d.scores == std::vector<double>{0.9, 0.8, 0.7});

  const auto merged = merge_tracklets(g.nodes, d);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].id() == 1);
  CHECK(merged[0].size() == 12);
  CHECK(merged[0].start() == 1);
  CHECK(merged[0].end() == 15);
}

TEST_CASE("rounding breaks score ties by tracklet id") {
  // Same-score competitors for node 2's predecessor slot: the edge whose
  // source has the smaller tracklet id wins, regardless of node index.
  const auto g = bare_graph({span(7, 1, 3), span(4, 1, 3, 50.0), span(9, 5, 7)},
                            {{0, 2}, {1, 2}});
  const MergeDecision d = round_edges(g, {0.8, 0.8}, 0.5);
  REQUIRE(d.accepted.size() == 1);
  CHECK(d.accepted[0].src == 1);  // tracklet id 4 beats 7

  // Same source, tie on score: smaller destination id first.
  const auto g2 = bare_graph({span(1, 1, 3), span(6, 5, 7), span(3, 5, 7, 50.0)},
                             {{0, 1}, {0, 2}});
  const MergeDecision d2 = round_edges(g2, {0.8, 0.8}, 0.5);
  REQUIRE(d2.accepted.size() == 1);
  CHECK(d2.accepted[0].dst == 2);  // tracklet id 3 beats 6
}

TEST_CASE("rounding needs strictly more than the threshold") {
  const auto g = bare_graph({span(1, 1, 3), span(2, 5, 7)}, {{0, 1}});
  CHECK(round_edges(g, {0.5}, 0.5).accepted.empty());
  CHECK(round_edges(g, {0.5 + 1e-9}, 0.5).accepted.size() == 1);
  CHECK_THROWS_AS(round_edges(g, {0.9, 0.1}, 0.5), std::invalid_argument);
}

TEST_CASE("rounding refuses joins that do not advance in time") {
  // Edge exists in the graph but the spans touch: end == start.
  const auto g = bare_graph({span(1, 1, 5), span(2, 5, 9)}, {{0, 1}});
  CHECK(round_edges(g, {0.99}, 0.5).accepted.empty());
}

TEST_CASE("merging validates the decision") {
  const std::vector<Tracklet> nodes{span(1, 1, 3), span(2, 5, 7),
                                    span(3, 9, 11)};
  MergeDecision two_succ;
  two_succ.accepted = {{0, 1}, {0, 2}};
  two_succ.scores = {0.9, 0.9};
  CHECK_THROWS_AS(merge_tracklets(nodes, two_succ), std::invalid_argument);

  MergeDecision two_pred;
  two_pred.accepted = {{0, 2}, {1, 2}};
  two_pred.scores = {0.9, 0.9};
  CHECK_THROWS_AS(merge_tracklets(nodes, two_pred), std::invalid_argument);

  MergeDecision overlapping;  // tracklet 2 starts before tracklet 1 ends
  overlapping.accepted = {{1, 0}};
  overlapping.scores = {0.9};
  CHECK_THROWS_AS(merge_tracklets(nodes, overlapping), std::invalid_argument);

  MergeDecision out_of_range;
  out_of_range.accepted = {{0, 5}};
  out_of_range.scores = {0.9};
  CHECK_THROWS_AS(merge_tracklets(nodes, out_of_range), std::invalid_argument);

  const std::vector<Tracklet> pair{span(1, 1, 3), span(2, 5, 7)};
  MergeDecision cycle;
  cycle.accepted = {{0, 1}, {1, 0}};
  cycle.scores = {0.9, 0.9};
  CHECK_THROWS_AS(merge_tracklets(pair, cycle), std::invalid_argument);
}

TEST_CASE("untouched tracklets pass through with fresh ids") {
  // Input ids are arbitrary; output ids follow ascending start frames.
  const std::vector<Tracklet> nodes{span(30, 9, 11), span(20, 1, 3),
                                    span(10, 5, 7)};
  const auto merged = merge_tracklets(nodes, {});
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].start() == 1);
  CHECK(merged[1].start() == 5);
  CHECK(merged[2].start() == 9);
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].id() == static_cast<int>(i) + 1);
  }
}

TEST_CASE("oracle hierarchy repairs fragmentation on synthetic data") {
  SynthConfig scfg;
  scfg.seed = 13;
  scfg.num_identities = 6;
  scfg.frame_count = 120;
  scfg.occlusion_count = 3;
  const auto bundle = generate(scfg);
  Stage1Config s1;
  s1.th_c = 0.3;
  const auto tracklets = track_sequence(bundle, s1);
  REQUIRE(tracklets.size() > 6);  // fragmented

  const auto attribution = attribute_detections(bundle);
  HierarchyConfig hcfg;
  hcfg.fps = bundle.fps;
  const auto merged = run_hierarchy_oracle(tracklets, attribution, 3, hcfg);
  CHECK(merged.size() < tracklets.size());

  const double before = idf1(*bundle.ground_truth, tracklets).idf1;
  const double after = idf1(*bundle.ground_truth, merged).idf1;
  CHECK(after >= before);

  // Merges driven by ground-truth labels never mix identities.
  for (const auto& t : merged) {
    std::set<int> ids;
    for (const auto& d : t.detections()) {
      const int id = attribution[d.frame][d.det_index];
      if (id != kBackground) ids.insert(id);
    }
    CHECK(ids.size() <= 1);
  }
}

TEST_CASE("teacher levels are labeled and shrink as merges apply") {
  SynthConfig scfg;
  scfg.seed = 29;
  scfg.num_identities = 5;
  scfg.frame_count = 100;
  const auto bundle = generate(scfg);
  Stage1Config s1;
  s1.th_c = 0.3;
  const auto tracklets = track_sequence(bundle, s1);
  const auto attribution = attribute_detections(bundle);

  HierarchyConfig hcfg;
  hcfg.fps = bundle.fps;
  const auto levels = teacher_levels(tracklets, attribution, 3, hcfg);
  REQUIRE(!levels.empty());
  CHECK(levels.size() <= 3);
  CHECK(levels[0].nodes.size() == tracklets.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    REQUIRE(levels[l].labels.has_value());
    CHECK(levels[l].labels->size() == levels[l].edges.size());
    if (l > 0) CHECK(levels[l].nodes.size() <= levels[l - 1].nodes.size());
  }
  // Level l+1's nodes are exactly what merging level l with its labels gives.
  const TrackletGraph& g0 = levels[0];
  std::vector<double> scores(g0.labels->begin(), g0.labels->end());
  const auto next = merge_tracklets(g0.nodes, round_edges(g0, scores, 0.5));
  if (levels.size() > 1) {
    REQUIRE(levels[1].nodes.size() == next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      CHECK(levels[1].nodes[i].start() == next[i].start());
      CHECK(levels[1].nodes[i].size() == next[i].size());
    }
  }
}

TEST_CASE("model-driven hierarchy yields structurally valid trajectories") {
  SynthConfig scfg;
  scfg.seed = 3;
  scfg.num_identities = 4;
  scfg.frame_count = 80;
  const auto bundle = generate(scfg);
  Stage1Config s1;
  s1.th_c = 0.3;
  const auto tracklets = track_sequence(bundle, s1);

  MpnnConfig mcfg;
  mcfg.l_mp = 2;
  mcfg.d_app = scfg.d_app;
  const ModelParams params = ModelParams::init(mcfg, 17);
  HierarchyConfig hcfg;
  hcfg.fps = bundle.fps;
  const auto out = run_hierarchy(tracklets, params, mcfg, hcfg);
  REQUIRE(!out.empty());
  CHECK(out.size() <= tracklets.size());

  std::set<std::pair<int, int>> used;
  int total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].id() == static_cast<int>(i) + 1);
    int prev_frame = 0;
    for (const auto& d : out[i].detections()) {
      CHECK(d.frame > prev_frame);
      prev_frame = d.frame;
      CHECK(used.insert({d.frame, d.det_index}).second);
      ++total;
    }
  }
  int input_total = 0;
  for (const auto& t : tracklets) input_total += t.size();
  CHECK(total == input_total);  // merging moves detections, never drops them

  // Zero levels means passthrough.
  HierarchyConfig none = hcfg;
  none.levels = 0;
  const auto same = run_hierarchy(tracklets, params, mcfg, none);
  REQUIRE(same.size() == tracklets.size());
  for (std::size_t i = 0; i < same.size(); ++i) {
    CHECK(same[i].size() == tracklets[i].size());
  }
}

TEST_CASE("interpolation fills small gaps linearly") {
  std::vector<Detection> dets;
  Detection a = det(10, 0.0, 0.0, 0.8);
  a.box = BBox{0, 0, 10, 20};
  Detection b = det(14, 8.0, 4.0, 0.6);
  b.box = BBox{8, 4, 14, 24};
  Detection c = det(15, 9.0, 5.0, 0.9);
  c.box = BBox{9, 5, 14, 24};
  const Trajectory t(3, {a, b, c});

  const Trajectory filled = interpolate(t, 5);
  REQUIRE(filled.size() == 6);  // 3 real + 3 synthesized
  CHECK(filled.id() == 3);
  for (int k = 1; k <= 3; ++k) {
    const Detection& d = filled.detections()[static_cast<std::size_t>(k)];
    const double f = k / 4.0;
    CHECK(d.frame == 10 + k);
    CHECK(d.box.x == doctest::Approx(0.0 + f * 8.0));
    CHECK(d.box.y == doctest::Approx(0.0 + f * 4.0));
    CHECK(d.box.w == doctest::Approx(10.0 + f * 4.0));
    CHECK(d.box.h == doctest::Approx(20.0 + f * 4.0));
    CHECK(d.confidence == doctest::Approx(0.6));  // min of the flanks
    CHECK(d.det_index == -1);
    CHECK(!d.embedding.has_value());
  }
  CHECK(filled.detections()[4].frame == 14);
  CHECK(filled.detections()[5].frame == 15);

  // Gap wider than max_gap stays open; max_gap < 1 disables the pass.
  const Trajectory wide(1, {det(1, 0, 0), det(10, 9, 0)});
  CHECK(interpolate(wide, 5).size() == 2);
  CHECK(interpolate(wide, 8).size() == 10);
  CHECK(interpolate(wide, 0).size() == 2);
}
