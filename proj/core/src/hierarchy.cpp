#include "mot/hierarchy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mot {

namespace {

std::vector<double> labels_as_scores(const TrackletGraph& graph) {
  if (!graph.labels) {
    throw std::invalid_argument("labels_as_scores: graph is unlabeled");
  }
  std::vector<double> s(graph.labels->size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<double>((*graph.labels)[i]);
  }
  return s;
}

}  // namespace

MergeDecision round_edges(const TrackletGraph& graph,
                          const std::vector<double>& scores,
                          double threshold) {
  if (scores.size() != graph.edges.size()) {
    std::ostringstream os;
    os << "round_edges: " << scores.size() << " scores for "
       << graph.edges.size() << " edges";
    throw std::invalid_argument(os.str());
  }
  std::vector<int> candidates;
  for (std::size_t e = 0; e < scores.size(); ++e) {
    if (scores[e] > threshold) candidates.push_back(static_cast<int>(e));
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (scores[static_cast<std::size_t>(a)] !=
        scores[static_cast<std::size_t>(b)]) {
      return scores[static_cast<std::size_t>(a)] >
             scores[static_cast<std::size_t>(b)];
    }
    const GraphEdge& ea = graph.edges[static_cast<std::size_t>(a)];
    const GraphEdge& eb = graph.edges[static_cast<std::size_t>(b)];
    const int ia = graph.nodes[static_cast<std::size_t>(ea.src)].id();
    const int ib = graph.nodes[static_cast<std::size_t>(eb.src)].id();
    if (ia != ib) return ia < ib;
    return graph.nodes[static_cast<std::size_t>(ea.dst)].id() <
           graph.nodes[static_cast<std::size_t>(eb.dst)].id();
  });

  std::vector<char> has_succ(graph.nodes.size(), 0),
      has_pred(graph.nodes.size(), 0);
  MergeDecision out;
  for (const int e : candidates) {
    const GraphEdge& edge = graph.edges[static_cast<std::size_t>(e)];
    const std::size_t a = static_cast<std::size_t>(edge.src);
    const std::size_t b = static_cast<std::size_t>(edge.dst);
    if (has_succ[a] || has_pred[b]) continue;
    if (graph.nodes[a].end() >= graph.nodes[b].start()) continue;
    has_succ[a] = 1;
    has_pred[b] = 1;
    out.accepted.push_back(edge);
    out.scores.push_back(scores[static_cast<std::size_t>(e)]);
  }
  return out;
}

std::vector<Tracklet> merge_tracklets(const std::vector<Tracklet>& tracklets,
                                      const MergeDecision& decision) {
  const std::size_t n = tracklets.size();
  std::vector<int> next(n, -1), prev(n, -1);
  for (const GraphEdge& e : decision.accepted) {
    if (e.src < 0 || e.dst < 0 || e.src >= static_cast<int>(n) ||
        e.dst >= static_cast<int>(n)) {
      throw std::invalid_argument("merge_tracklets: edge index out of range");
    }
    if (next[static_cast<std::size_t>(e.src)] != -1 ||
        prev[static_cast<std::size_t>(e.dst)] != -1) {
      std::ostringstream os;
      os << "merge_tracklets: tracklet " << tracklets[e.src].id() << " -> "
         << tracklets[e.dst].id()
         << " conflicts with an already accepted edge";
      throw std::invalid_argument(os.str());
    }
    next[static_cast<std::size_t>(e.src)] = e.dst;
    prev[static_cast<std::size_t>(e.dst)] = e.src;
  }

  struct Chain {
    std::vector<Detection> dets;
    int start = 0;
    std::size_t head = 0;
  };
  std::vector<Chain> chains;
  std::size_t visited = 0;
  for (std::size_t head = 0; head < n; ++head) {
    if (prev[head] != -1) continue;
    Chain c;
    c.head = head;
    c.start = tracklets[head].start();
    int at = static_cast<int>(head);
    while (at != -1) {
      const Tracklet& t = tracklets[static_cast<std::size_t>(at)];
      if (!c.dets.empty() && c.dets.back().frame >= t.start()) {
        std::ostringstream os;
        os << "merge_tracklets: chain through tracklet " << t.id()
           << " overlaps in time at frame " << t.start();
        throw std::invalid_argument(os.str());
      }
      c.dets.insert(c.dets.end(), t.detections().begin(), t.detections().end());
      at = next[static_cast<std::size_t>(at)];
      visited += 1;
    }
    chains.push_back(std::move(c));
  }
  // Every tracklet must sit on exactly one chain; a cyclic decision has no
  // head, so its members would otherwise vanish silently.
  if (visited != n) {
    throw std::invalid_argument("merge_tracklets: decision forms a cycle");
  }

  std::sort(chains.begin(), chains.end(), [](const Chain& a, const Chain& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.head < b.head;
  });
  std::vector<Tracklet> out;
  out.reserve(chains.size());
  for (std::size_t i = 0; i < chains.size(); ++i) {
    out.emplace_back(static_cast<int>(i) + 1, std::move(chains[i].dets));
  }
  return out;
}

std::vector<Trajectory> run_hierarchy(std::vector<Tracklet> tracklets,
                                      const ModelParams& params,
                                      const MpnnConfig& model_cfg,
                                      const HierarchyConfig& cfg) {
  for (int level = 0; level < cfg.levels; ++level) {
    if (tracklets.empty()) break;
    const TrackletGraph graph = build_graph(tracklets, cfg.graph, cfg.fps);
    const std::vector<double> scores =
        score_edges(graph, params, model_cfg, level);
    tracklets = merge_tracklets(tracklets,
                                round_edges(graph, scores, cfg.threshold));
  }
  return tracklets;
}

std::vector<Trajectory> run_hierarchy_oracle(
    std::vector<Tracklet> tracklets,
    const std::vector<std::vector<int>>& attribution, int levels,
    const HierarchyConfig& cfg) {
  for (int level = 0; level < levels; ++level) {
    if (tracklets.empty()) break;
    const TrackletGraph graph =
        label_edges(build_graph(tracklets, cfg.graph, cfg.fps), attribution);
    tracklets = merge_tracklets(
        tracklets, round_edges(graph, labels_as_scores(graph), cfg.threshold));
  }
  return tracklets;
}

std::vector<TrackletGraph> teacher_levels(
    std::vector<Tracklet> tracklets,
    const std::vector<std::vector<int>>& attribution, int levels,
    const HierarchyConfig& cfg) {
  std::vector<TrackletGraph> out;
  for (int level = 0; level < levels; ++level) {
    if (tracklets.empty()) break;
    TrackletGraph graph =
        label_edges(build_graph(tracklets, cfg.graph, cfg.fps), attribution);
    tracklets = merge_tracklets(
        tracklets, round_edges(graph, labels_as_scores(graph), cfg.threshold));
    out.push_back(std::move(graph));
  }
  return out;
}

Trajectory interpolate(const Trajectory& trajectory, int max_gap) {
  if (max_gap < 1) return trajectory;
  const auto& dets = trajectory.detections();
  std::vector<Detection> filled;
  filled.reserve(dets.size());
  for (std::size_t k = 0; k < dets.size(); ++k) {
    if (k > 0) {
      const Detection& a = dets[k - 1];
      const Detection& b = dets[k];
      const int missing = b.frame - a.frame - 1;
      if (missing >= 1 && missing <= max_gap) {
        for (int f = a.frame + 1; f < b.frame; ++f) {
          const double t = static_cast<double>(f - a.frame) /
                           static_cast<double>(b.frame - a.frame);
          Detection d;
          d.frame = f;
          d.box.x = a.box.x + t * (b.box.x - a.box.x);
          d.box.y = a.box.y + t * (b.box.y - a.box.y);
          d.box.w = a.box.w + t * (b.box.w - a.box.w);
          d.box.h = a.box.h + t * (b.box.h - a.box.h);
          d.confidence = std::min(a.confidence, b.confidence);
          d.det_index = -1;  // synthesized, not present in any input frame
          filled.push_back(d);
        }
      }
    }
    filled.push_back(dets[k]);
  }
  return Trajectory(trajectory.id(), std::move(filled));
}

}  // namespace mot
