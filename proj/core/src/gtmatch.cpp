#include "mot/gtmatch.hpp"

#include <map>
#include <stdexcept>

#include "mot/assignment.hpp"
#include "mot/geometry.hpp"

namespace mot {

std::vector<std::vector<int>> attribute_detections(const SequenceBundle& bundle,
                                                   double iou_gate) {
  if (!bundle.ground_truth) {
    throw std::invalid_argument(
        "attribute_detections: bundle carries no ground truth");
  }
  std::vector<std::vector<const GtRecord*>> gt_by_frame(bundle.frame_count + 1);
  for (const GtRecord& r : *bundle.ground_truth) {
    gt_by_frame[r.frame].push_back(&r);
  }

  std::vector<std::vector<int>> out(bundle.frame_count + 1);
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    const auto& dets = bundle.detections_in(frame);
    const auto& gts = gt_by_frame[frame];
    out[frame].assign(dets.size(), kBackground);
    if (dets.empty() || gts.empty()) continue;

    CostMatrix costs(dets.size(), gts.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      for (std::size_t j = 0; j < gts.size(); ++j) {
        const double overlap = iou(dets[i].box, gts[j]->box);
        if (overlap >= iou_gate) costs.at(i, j) = 1.0 - overlap;
      }
    }
    for (const auto& [det_idx, gt_idx] : solve_assignment(costs).matches) {
      out[frame][det_idx] = gts[gt_idx]->identity;
    }
  }
  return out;
}

int majority_vote(const std::map<int, int>& votes) {
  int best_id = kBackground;
  int best_count = -1;
  for (const auto& [id, count] : votes) {
    // std::map iterates ascending, and kBackground sorts first, so ties keep
    // the smaller real identity and never promote background over a tie.
    if (count > best_count || (count == best_count && best_id == kBackground)) {
      best_id = id;
      best_count = count;
    }
  }
  return best_id;
}

int tracklet_identity(const Tracklet& t,
                      const std::vector<std::vector<int>>& attribution) {
  std::map<int, int> votes;
  for (const Detection& d : t.detections()) {
    votes[attribution[d.frame][d.det_index]] += 1;
  }
  return majority_vote(votes);
}

double tracklet_purity(const Tracklet& t, int identity,
                       const std::vector<std::vector<int>>& attribution) {
  int hits = 0;
  for (const Detection& d : t.detections()) {
    if (attribution[d.frame][d.det_index] == identity) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

}  // namespace mot
