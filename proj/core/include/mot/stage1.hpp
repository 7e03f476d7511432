#pragma once

#include <vector>

#include "mot/assignment.hpp"
#include "mot/kalman.hpp"
#include "mot/types.hpp"

namespace mot {

enum class CostMode { kIou, kFusedMin, kFusedWeighted };

struct Stage1Config {
  double th_c = 0.2;             // matches costing more than this are rejected
  int max_age = 30;              // frames an unmatched track survives
  double min_confidence = 0.1;   // detections below this are ignored entirely
  CostMode cost_mode = CostMode::kIou;
  double fuse_weight = 0.5;      // weight on the motion term in kFusedWeighted
  bool byte_two_round = true;    // match high-confidence detections first
  double high_conf_split = 0.6;  // boundary between the two rounds
  KalmanParams kalman;
};

// What the cost matrix needs to know about an active track: its motion
// prediction for the current frame and its most recent appearance embedding.
struct TrackSnapshot {
  BBox predicted_box;
  const std::vector<double>* embedding = nullptr;
};

// Rows are tracks, columns are detections. Entry = 1 - IoU of the predicted
// and detected boxes, optionally fused with normalized cosine distance of the
// embeddings ((1 - cos)/2); anything above th_c becomes kForbidden. Fused
// modes throw std::invalid_argument when an embedding is missing.
CostMatrix build_cost_matrix(const std::vector<TrackSnapshot>& tracks,
                             const std::vector<Detection>& dets,
                             const Stage1Config& cfg);

// Frame-by-frame association pass. Emits short, high-purity tracklets with
// ids 1..N assigned by ascending start frame.
std::vector<Tracklet> track_sequence(const SequenceBundle& bundle,
                                     const Stage1Config& cfg);

}  // namespace mot
