#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mot/types.hpp"

namespace mot {

struct GraphConfig {
  int K = 10;      // candidate edges kept per node and temporal side
  int L_app = 5;   // detections per side for the local appearance term
  double w_time = 0.4;   // neighbor-score weight: normalized time gap
  double w_space = 0.3;  // neighbor-score weight: normalized center distance
  double w_app = 0.3;    // neighbor-score weight: cosine distance of means
};

struct GraphEdge {
  int src = 0;  // node index; nodes[src] ends before nodes[dst] starts
  int dst = 0;
};

// Sparse graph over temporally disjoint tracklets. Edges run earlier→later
// and are stored sorted by (src, dst), which fixes the processing order for
// everything downstream.
struct TrackletGraph {
  std::vector<Tracklet> nodes;
  std::vector<GraphEdge> edges;
  std::vector<std::array<double, 8>> raw_edge_features;
  std::vector<std::vector<double>> node_inputs;  // mean embedding per node
  std::optional<std::vector<int>> labels;        // per-edge 0/1, once labeled
};

// Mean of the tracklet's detection embeddings. Throws std::invalid_argument
// if any detection lacks an embedding.
std::vector<double> node_input(const Tracklet& t);

// [ L2 distance of the mean embeddings,
//   mean pairwise cosine similarity over the detections flanking the gap
//   (last min(L_app, len) of t_a against first min(L_app, len) of t_b) ]
std::array<double, 2> appearance_features(const Tracklet& t_a,
                                          const Tracklet& t_b, int l_app);

// Eight-dimensional edge descriptor: relative geometry of the boxes flanking
// the gap (4), gap in seconds (1), appearance terms (2), and the generalized
// IoU of the two motion extrapolations meeting mid-gap (1).
std::array<double, 8> raw_edge_feature(const Tracklet& t_a, const Tracklet& t_b,
                                       const GraphConfig& cfg, double fps);

// Connects each tracklet to its K most compatible predecessors and K most
// compatible successors among all temporally disjoint candidates, scored by
// a weighted blend of time gap, spatial distance, and appearance distance.
TrackletGraph build_graph(const std::vector<Tracklet>& tracklets,
                          const GraphConfig& cfg, double fps);

// Fills labels: 1 when both endpoints' majority ground-truth identities agree
// and neither is background. `attribution` comes from attribute_detections.
TrackletGraph label_edges(TrackletGraph graph,
                          const std::vector<std::vector<int>>& attribution);

// Convenience overload that attributes detections itself.
TrackletGraph label_edges(TrackletGraph graph, const SequenceBundle& bundle,
                          double iou_gate = 0.5);

}  // namespace mot
