#pragma once

#include <string>
#include <vector>

#include "mot/types.hpp"

namespace mot {

struct EvalReport {
  double idf1 = 0.0;
  int id_switches = 0;
  double hpr = 0.0;  // share of predictions whose modal identity share > 0.8
  int tracklet_count = 0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

struct Idf1Result {
  double idf1 = 0.0;
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;
};

// Identity-preservation F1: a single global one-to-one mapping between
// ground-truth and predicted identities is chosen to maximize the number of
// IoU-gated per-frame agreements (idtp); idf1 = 2*idtp / (2*idtp+idfp+idfn).
// Both sides empty scores 1; an empty side against a non-empty one scores 0.
Idf1Result idf1(const std::vector<GtRecord>& gt,
                const std::vector<Trajectory>& preds, double iou_gate = 0.5);

// Number of frames at which a ground-truth identity's matched predicted id
// differs from the predicted id it last carried. Per-frame matching is an
// optimal assignment over IoU-gated costs, with a small surcharge (0.01) on
// pairs that would break the previous frame's pairing.
int id_switches(const std::vector<GtRecord>& gt,
                const std::vector<Trajectory>& preds, double iou_gate = 0.5);

struct HprResult {
  double rate = 0.0;
  std::vector<double> purity;  // per tracklet: share of its modal identity
};

// High-purity rate: the fraction of tracklets in which one real ground-truth
// identity accounts for strictly more than 80% of the detections. Tracklets
// whose modal attribution is background are never high-purity but still
// count in the denominator. `attribution` comes from attribute_detections;
// detections without a valid index there (e.g. interpolated) count as
// background. Throws on an empty tracklet list.
HprResult hpr(const std::vector<Tracklet>& tracklets,
              const std::vector<std::vector<int>>& attribution);

// Convenience overload: attributes the tracklets' own detections against the
// ground truth frame by frame, so it works for predictions loaded from disk.
HprResult hpr(const std::vector<Tracklet>& tracklets,
              const std::vector<GtRecord>& gt, double iou_gate = 0.5);

// Full scorecard for a prediction set against ground truth.
EvalReport evaluate(const std::vector<GtRecord>& gt,
                    const std::vector<Trajectory>& preds,
                    double iou_gate = 0.5);

// One-line JSON object / aligned two-column text rendering of a report.
std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);

}  // namespace mot
