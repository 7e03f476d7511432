#include "mot/tgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mot/geometry.hpp"
#include "mot/gtmatch.hpp"
#include "mot/kalman.hpp"

namespace mot {

namespace {

const std::vector<double>& embedding_of(const Detection& d, const Tracklet& t) {
  if (!d.embedding) {
    std::ostringstream os;
    os << "tracklet " << t.id() << ": detection at frame " << d.frame
       << " carries no embedding";
    throw std::invalid_argument(os.str());
  }
  return *d.embedding;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<double> node_input(const Tracklet& t) {
  const std::vector<double>& first = embedding_of(t.first(), t);
  std::vector<double> mean(first.size(), 0.0);
  for (const Detection& d : t.detections()) {
    const std::vector<double>& e = embedding_of(d, t);
    if (e.size() != mean.size()) {
      std::ostringstream os;
      os << "tracklet " << t.id() << ": embedding dimension changes from "
         << mean.size() << " to " << e.size();
      throw std::invalid_argument(os.str());
    }
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += e[k];
  }
  const double inv = 1.0 / static_cast<double>(t.size());
  for (double& v : mean) v *= inv;
  return mean;
}

std::array<double, 2> appearance_features(const Tracklet& t_a,
                                          const Tracklet& t_b, int l_app) {
  if (l_app < 1) {
    throw std::invalid_argument("appearance_features: L_app must be >= 1");
  }
  const std::vector<double> mean_a = node_input(t_a);
  const std::vector<double> mean_b = node_input(t_b);
  if (mean_a.size() != mean_b.size()) {
    throw std::invalid_argument(
        "appearance_features: embedding dimensions differ between tracklets");
  }
  double dist2 = 0.0;
  for (std::size_t k = 0; k < mean_a.size(); ++k) {
    const double d = mean_b[k] - mean_a[k];
    dist2 += d * d;
  }

  const int na = std::min<int>(l_app, static_cast<int>(t_a.size()));
  const int nb = std::min<int>(l_app, static_cast<int>(t_b.size()));
  double sum = 0.0;
  for (int i = 0; i < na; ++i) {
    const Detection& da =
        t_a.detections()[t_a.size() - static_cast<std::size_t>(na) + i];
    for (int j = 0; j < nb; ++j) {
      const Detection& db = t_b.detections()[static_cast<std::size_t>(j)];
      sum += cosine(embedding_of(da, t_a), embedding_of(db, t_b));
    }
  }
  return {std::sqrt(dist2), sum / (static_cast<double>(na) * nb)};
}

std::array<double, 8> raw_edge_feature(const Tracklet& t_a, const Tracklet& t_b,
                                       const GraphConfig& cfg, double fps) {
  if (t_a.end() >= t_b.start()) {
    throw std::invalid_argument(
        "raw_edge_feature: tracklets must be ordered and temporally disjoint");
  }
  const std::array<double, 4> geom =
      relative_geometry(t_a.last().box, t_b.first().box);
  const double dt = time_difference(t_a.end(), t_b.start(), fps);
  const std::array<double, 2> app = appearance_features(t_a, t_b, cfg.L_app);
  const double motion = predict_to_midframe(t_a, t_b).score;
  return {geom[0], geom[1], geom[2], geom[3], dt, app[0], app[1], motion};
}

TrackletGraph build_graph(const std::vector<Tracklet>& tracklets,
                          const GraphConfig& cfg, double fps) {
  if (tracklets.empty()) {
    throw std::invalid_argument("build_graph: need at least one tracklet");
  }
  if (cfg.K < 1 || cfg.L_app < 1) {
    throw std::invalid_argument("build_graph: K and L_app must be >= 1");
  }
  TrackletGraph g;
  g.nodes = tracklets;
  const int n = static_cast<int>(g.nodes.size());

  g.node_inputs.reserve(g.nodes.size());
  for (const Tracklet& t : g.nodes) g.node_inputs.push_back(node_input(t));

  // Normalizers for the composite neighbor score: total temporal extent and
  // the diagonal of the region spanned by every box (image size is unknown).
  int min_start = std::numeric_limits<int>::max(), max_end = 0;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const Tracklet& t : g.nodes) {
    min_start = std::min(min_start, t.start());
    max_end = std::max(max_end, t.end());
    for (const Detection& d : t.detections()) {
      x0 = std::min(x0, d.box.x);
      y0 = std::min(y0, d.box.y);
      x1 = std::max(x1, d.box.x + d.box.w);
      y1 = std::max(y1, d.box.y + d.box.h);
    }
  }
  const double span = std::max(1.0, static_cast<double>(max_end - min_start + 1));
  const double diag = std::max(1e-9, std::hypot(x1 - x0, y1 - y0));

  struct Scored {
    double score;
    int other;
  };
  std::vector<std::vector<Scored>> succ(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (g.nodes[i].end() >= g.nodes[j].start()) continue;
      const BBox& ba = g.nodes[i].last().box;
      const BBox& bb = g.nodes[j].first().box;
      const double gap = g.nodes[j].start() - g.nodes[i].end();
      const double dist = std::hypot(bb.cx() - ba.cx(), bb.cy() - ba.cy());
      const double score = cfg.w_time * (gap / span) +
                           cfg.w_space * (dist / diag) +
                           cfg.w_app *
                               (1.0 - cosine(g.node_inputs[i],
                                             g.node_inputs[j])) / 2.0;
      succ[i].push_back({score, j});
    }
  }

  const auto by_score = [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score < b.score : a.other < b.other;
  };
  std::vector<std::vector<Scored>> pred(g.nodes.size());
  for (int i = 0; i < n; ++i) {
    for (const Scored& s : succ[i]) pred[s.other].push_back({s.score, i});
  }

  std::vector<char> keep(g.nodes.size() * g.nodes.size(), 0);
  const auto mark_top_k = [&](std::vector<Scored>& cands, int self,
                              bool self_is_src) {
    const std::size_t k = std::min<std::size_t>(cands.size(), cfg.K);
    std::partial_sort(cands.begin(), cands.begin() + k, cands.end(), by_score);
    for (std::size_t r = 0; r < k; ++r) {
      const int src = self_is_src ? self : cands[r].other;
      const int dst = self_is_src ? cands[r].other : self;
      keep[static_cast<std::size_t>(src) * n + dst] = 1;
    }
  };
  for (int i = 0; i < n; ++i) {
    mark_top_k(succ[i], i, true);
    mark_top_k(pred[i], i, false);
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (keep[static_cast<std::size_t>(i) * n + j]) {
        g.edges.push_back({i, j});
      }
    }
  }
  g.raw_edge_features.reserve(g.edges.size());
  for (const GraphEdge& e : g.edges) {
    g.raw_edge_features.push_back(
        raw_edge_feature(g.nodes[e.src], g.nodes[e.dst], cfg, fps));
  }
  return g;
}

TrackletGraph label_edges(TrackletGraph graph,
                          const std::vector<std::vector<int>>& attribution) {
  std::vector<int> identity(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    identity[i] = tracklet_identity(graph.nodes[i], attribution);
  }
  std::vector<int> labels(graph.edges.size(), 0);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const int a = identity[graph.edges[e].src];
    const int b = identity[graph.edges[e].dst];
    labels[e] = (a != kBackground && a == b) ? 1 : 0;
  }
  graph.labels = std::move(labels);
  return graph;
}

TrackletGraph label_edges(TrackletGraph graph, const SequenceBundle& bundle,
                          double iou_gate) {
  return label_edges(std::move(graph), attribute_detections(bundle, iou_gate));
}

}  // namespace mot
