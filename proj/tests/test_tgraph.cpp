#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mot/dataio.hpp"
#include "mot/geometry.hpp"
#include "mot/kalman.hpp"
#include "mot/stage1.hpp"
#include "mot/tgraph.hpp"

using namespace mot;

namespace {

Detection det(int frame, double x, double y, std::vector<double> emb,
              double w = 10, double h = 10) {
  Detection d;
  d.frame = frame;
  d.box = BBox{x, y, w, h};
  d.confidence = 0.9;
  d.embedding = std::move(emb);
  return d;
}

Tracklet line_tracklet(int id, int start, int end, double x,
                       std::vector<double> emb) {
  std::vector<Detection> dets;
  for (int f = start; f <= end; ++f) dets.push_back(det(f, x, 0.0, emb));
  return Tracklet(id, dets);
}

double cosine_oracle(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("node input averages the embeddings") {
  Tracklet t(1, {det(1, 0, 0, {1.0, 0.0}), det(2, 0, 0, {0.0, 1.0}),
                 det(3, 0, 0, {0.5, 0.5})});
  const auto mean = node_input(t);
  REQUIRE(mean.size() == 2);
  CHECK(mean[0] == doctest::Approx(0.5));
  CHECK(mean[1] == doctest::Approx(0.5));

  Detection bare;
  bare.frame = 4;
  bare.box = BBox{0, 0, 10, 10};
  CHECK_THROWS_AS(node_input(Tracklet(2, {bare})), std::invalid_argument);
  CHECK_THROWS_AS(
      node_input(Tracklet(3, {det(1, 0, 0, {1.0}), det(2, 0, 0, {1.0, 0.0})})),
      std::invalid_argument);
}

TEST_CASE("appearance features follow the flanking-window definition") {
  // t_a has 3 detections, t_b has 2; with l_app = 2 the window is the last two
  // of t_a against both of t_b.
  Tracklet a(1, {det(1, 0, 0, {1, 0}), det(2, 0, 0, {0, 1}),
                 det(3, 0, 0, {1, 1})});
  Tracklet b(2, {det(5, 0, 0, {1, 0}), det(6, 0, 0, {0, 1})});

  const auto f = appearance_features(a, b, 2);

  std::vector<double> mean_a{2.0 / 3.0, 2.0 / 3.0}, mean_b{0.5, 0.5};
  const double dx = mean_b[0] - mean_a[0], dy = mean_b[1] - mean_a[1];
  CHECK(f[0] == doctest::Approx(std::sqrt(dx * dx + dy * dy)));

  double sum = 0.0;
  const std::vector<std::vector<double>> flank_a{{0, 1}, {1, 1}};
  const std::vector<std::vector<double>> flank_b{{1, 0}, {0, 1}};
  for (const auto& ea : flank_a)
    for (const auto& eb : flank_b) sum += cosine_oracle(ea, eb);
  CHECK(f[1] == doctest::Approx(sum / 4.0));

  // l_app larger than either side shrinks to the full tracklets.
  const auto wide = appearance_features(a, b, 50);
  double all = 0.0;
  const std::vector<std::vector<double>> all_a{{1, 0}, {0, 1}, {1, 1}};
  for (const auto& ea : all_a)
    for (const auto& eb : flank_b) all += cosine_oracle(ea, eb);
  CHECK(wide[1] == doctest::Approx(all / 6.0));

  CHECK_THROWS_AS(appearance_features(a, b, 0), std::invalid_argument);
}

TEST_CASE("raw edge feature composes the documented pieces") {
  const double fps = 25.0;
  Tracklet a(1, {det(1, 0, 0, {1, 0}), det(2, 2, 1, {0.8, 0.2})});
  Tracklet b(2, {det(6, 10, 5, {0.2, 0.8}), det(7, 12, 6, {0, 1})});
  GraphConfig cfg;
  cfg.L_app = 2;

  const auto f = raw_edge_feature(a, b, cfg, fps);
  const auto geom = relative_geometry(a.last().box, b.first().box);
  for (int k = 0; k < 4; ++k) CHECK(f[k] == doctest::Approx(geom[k]));
  CHECK(f[4] == doctest::Approx((6 - 2) / fps));
  const auto app = appearance_features(a, b, 2);
  CHECK(f[5] == doctest::Approx(app[0]));
  CHECK(f[6] == doctest::Approx(app[1]));
  CHECK(f[7] == doctest::Approx(predict_to_midframe(a, b).score));

  CHECK_THROWS_AS(raw_edge_feature(b, a, cfg, fps), std::invalid_argument);
}

TEST_CASE("three tracklets with K=1 chain up") {
  std::vector<Tracklet> nodes{line_tracklet(1, 1, 2, 0.0, {1, 0}),
                              line_tracklet(2, 4, 5, 10.0, {1, 0}),
                              line_tracklet(3, 7, 8, 20.0, {1, 0})};
  GraphConfig cfg;
  cfg.K = 1;
  const auto g = build_graph(nodes, cfg, 25.0);

  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0].src == 0);
  CHECK(g.edges[0].dst == 1);
  CHECK(g.edges[1].src == 1);
  CHECK(g.edges[1].dst == 2);
  CHECK(g.raw_edge_features.size() == 2);
  CHECK(g.node_inputs.size() == 3);
  CHECK(!g.labels.has_value());

  CHECK_THROWS_AS(build_graph({}, cfg, 25.0), std::invalid_argument);
  GraphConfig bad = cfg;
  bad.K = 0;
  CHECK_THROWS_AS(build_graph(nodes, bad, 25.0), std::invalid_argument);
}

TEST_CASE("graph on synthetic tracklets matches an independent selector") {
  SynthConfig scfg;
  scfg.seed = 5;
  scfg.num_identities = 6;
  scfg.frame_count = 90;
  scfg.occlusion_count = 3;
  const auto bundle = generate(scfg);
  Stage1Config s1;
  s1.th_c = 0.3;
  const auto tracklets = track_sequence(bundle, s1);
  REQUIRE(tracklets.size() >= 8);

  GraphConfig cfg;
  cfg.K = 3;
  const auto g = build_graph(tracklets, cfg, bundle.fps);
  const int n = static_cast<int>(tracklets.size());

  // Recompute the kept edge set from scratch: score every disjoint pair, keep
  // each node's K best successors and K best predecessors, take the union.
  int min_start = 1 << 30, max_end = 0;
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  std::vector<std::vector<double>> means;
  for (const auto& t : tracklets) {
    means.push_back(node_input(t));
    min_start = std::min(min_start, t.start());
    max_end = std::max(max_end, t.end());
    for (const auto& d : t.detections()) {
      x0 = std::min(x0, d.box.x);
      y0 = std::min(y0, d.box.y);
      x1 = std::max(x1, d.box.x + d.box.w);
      y1 = std::max(y1, d.box.y + d.box.h);
    }
  }
  const double span = std::max(1.0, double(max_end - min_start + 1));
  const double diag = std::max(1e-9, std::hypot(x1 - x0, y1 - y0));
  const auto score = [&](int i, int j) {
    const BBox& ba = tracklets[i].last().box;
    const BBox& bb = tracklets[j].first().box;
    const double gap = tracklets[j].start() - tracklets[i].end();
    const double dist = std::hypot(bb.cx() - ba.cx(), bb.cy() - ba.cy());
    return cfg.w_time * gap / span + cfg.w_space * dist / diag +
           cfg.w_app * (1.0 - cosine_oracle(means[i], means[j])) / 2.0;
  };

  std::set<std::pair<int, int>> expected;
  const auto take = [&](int self, bool as_src) {
    std::vector<std::pair<double, int>> cands;
    for (int o = 0; o < n; ++o) {
      const int i = as_src ? self : o, j = as_src ? o : self;
      if (tracklets[i].end() < tracklets[j].start()) {
        cands.push_back({score(i, j), o});
      }
    }
    std::sort(cands.begin(), cands.end());
    for (std::size_t r = 0; r < std::min<std::size_t>(cands.size(), cfg.K); ++r) {
      const int o = cands[r].second;
      expected.insert(as_src ? std::make_pair(self, o)
                             : std::make_pair(o, self));
    }
  };
  for (int v = 0; v < n; ++v) {
    take(v, true);
    take(v, false);
  }

  std::set<std::pair<int, int>> got;
  for (const auto& e : g.edges) got.insert({e.src, e.dst});
  CHECK(got == expected);

  // Structural invariants: sorted unique edges, all pointing forward in time.
  for (std::size_t e = 1; e < g.edges.size(); ++e) {
    const auto &p = g.edges[e - 1], &q = g.edges[e];
    CHECK((p.src < q.src || (p.src == q.src && p.dst < q.dst)));
  }
  std::vector<int> out_degree(n, 0);
  for (const auto& e : g.edges) {
    CHECK(tracklets[e.src].end() < tracklets[e.dst].start());
    out_degree[e.src] += 1;
  }
  for (int v = 0; v < n; ++v) {
    int disjoint_succ = 0;
    for (int j = 0; j < n; ++j) {
      if (tracklets[v].end() < tracklets[j].start()) ++disjoint_succ;
    }
    CHECK(out_degree[v] >= std::min(disjoint_succ, cfg.K));
  }
}

TEST_CASE("edge labels demand matching non-background identities") {
  SequenceBundle b;
  b.frame_count = 8;
  b.frames.resize(8);
  // Identity 1 lives at y=0 for frames 1..8; identity 2 at y=100.
  std::vector<GtRecord> records;
  for (int f = 1; f <= 8; ++f) {
    records.push_back({f, 1, BBox{double(f), 0, 10, 10}, 1.0});
    records.push_back({f, 2, BBox{double(f), 100, 10, 10}, 1.0});
  }
  b.ground_truth = records;

  const auto add = [&](int frame, double x, double y) {
    Detection d = det(frame, x, y, {1, 0});
    d.det_index = b.add_detection(d);
    return d;
  };
  // Nodes: 0 = id 1 early, 1 = id 1 late, 2 = id 2 late, 3 = off-gt late.
  std::vector<Tracklet> nodes;
  nodes.push_back(Tracklet(1, {add(1, 1, 0), add(2, 2, 0)}));
  nodes.push_back(Tracklet(2, {add(5, 5, 0), add(6, 6, 0)}));
  nodes.push_back(Tracklet(3, {add(5, 5, 100), add(6, 6, 100)}));
  nodes.push_back(Tracklet(4, {add(5, 400, 300), add(6, 400, 300)}));

  GraphConfig cfg;
  const auto g = label_edges(build_graph(nodes, cfg, 25.0), b);
  REQUIRE(g.labels.has_value());
  REQUIRE(g.labels->size() == g.edges.size());
  bool saw_positive = false, saw_same_negative = false;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int src = g.edges[e].src, dst = g.edges[e].dst;
    if (src == 0 && dst == 1) {
      CHECK((*g.labels)[e] == 1);
      saw_positive = true;
    } else {
      CHECK((*g.labels)[e] == 0);
      if (src == 0 && dst == 3) saw_same_negative = true;
    }
  }
  CHECK(saw_positive);
  CHECK(saw_same_negative);  // background successor stays negative
}
