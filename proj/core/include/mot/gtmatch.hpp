#pragma once

#include <map>
#include <vector>

#include "mot/types.hpp"

namespace mot {

// Identity assigned to detections that match no ground-truth box.
inline constexpr int kBackground = -1;

// Per-frame optimal matching of detections to ground-truth boxes (IoU at
// least iou_gate). Returns, for each frame slot and detection index, the
// matched ground-truth identity or kBackground. Requires ground truth.
std::vector<std::vector<int>> attribute_detections(const SequenceBundle& bundle,
                                                   double iou_gate = 0.5);

// Majority identity over a tracklet's attributed detections; ties prefer the
// smaller identity number, and a background majority yields kBackground.
int tracklet_identity(const Tracklet& t,
                      const std::vector<std::vector<int>>& attribution);

// The tie-break rule above, applied to raw identity->count tallies: highest
// count wins, real identities beat kBackground on ties, then smaller number.
int majority_vote(const std::map<int, int>& votes);

// Fraction of the tracklet's detections carrying the given identity.
double tracklet_purity(const Tracklet& t, int identity,
                       const std::vector<std::vector<int>>& attribution);

}  // namespace mot
