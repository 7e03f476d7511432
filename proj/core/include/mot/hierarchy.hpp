#pragma once

#include <vector>

#include "mot/model.hpp"
#include "mot/tgraph.hpp"
#include "mot/types.hpp"

namespace mot {

// Edges accepted for merging. Accepted edges always form vertex-disjoint
// chains: at most one successor and one predecessor per tracklet, joined
// only across non-overlapping time spans.
struct MergeDecision {
  std::vector<GraphEdge> accepted;  // node indices of the source graph
  std::vector<double> scores;       // aligned with `accepted`
};

// Projects soft scores onto a consistent merge set: edges above `threshold`
// are visited in descending score order (ties by earlier endpoint's tracklet
// id, then the later one's) and accepted when both chain slots are free and
// the join keeps time strictly increasing.
MergeDecision round_edges(const TrackletGraph& graph,
                          const std::vector<double>& scores, double threshold);

// Concatenates each accepted chain into one tracklet; untouched tracklets
// pass through. Ids are reassigned 1..N by ascending start frame. Throws if
// the decision breaks the chain invariants or a chain overlaps itself.
std::vector<Tracklet> merge_tracklets(const std::vector<Tracklet>& tracklets,
                                      const MergeDecision& decision);

struct HierarchyConfig {
  double threshold = 0.5;  // score needed to merge
  int levels = 3;          // merge rounds to run
  double fps = 25.0;
  GraphConfig graph;
};

// Full second stage: per level, build the graph, score edges with the model
// (level adapter selected by the level index), round, and merge. Runs
// cfg.levels rounds (each must have an adapter, so levels <= model_cfg.hl);
// with 0 levels the input passes through unchanged.
std::vector<Trajectory> run_hierarchy(std::vector<Tracklet> tracklets,
                                      const ModelParams& params,
                                      const MpnnConfig& model_cfg,
                                      const HierarchyConfig& cfg);

// Same loop but scored by ground truth instead of the model: an edge scores
// 1 when its endpoints' majority identities agree (and are not background),
// else 0. Upper-bounds what a perfect classifier could deliver.
std::vector<Trajectory> run_hierarchy_oracle(
    std::vector<Tracklet> tracklets,
    const std::vector<std::vector<int>>& attribution, int levels,
    const HierarchyConfig& cfg);

// Teacher forcing for training: the labeled graph at every level, where each
// next level's tracklets come from merging with the labels as scores. The
// result feeds TrainSample::levels.
std::vector<TrackletGraph> teacher_levels(
    std::vector<Tracklet> tracklets,
    const std::vector<std::vector<int>>& attribution, int levels,
    const HierarchyConfig& cfg);

// Fills frame gaps of at most max_gap missing frames by per-coordinate linear
// interpolation between the flanking boxes; inserted detections take the
// smaller flanking confidence and no embedding.
Trajectory interpolate(const Trajectory& trajectory, int max_gap);

}  // namespace mot
