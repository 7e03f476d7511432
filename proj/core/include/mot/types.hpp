#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mot {

// Axis-aligned box, (x, y) is the top-left corner, sub-pixel coordinates allowed.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  bool valid() const;
};

// One observed box in one frame. Frames are 1-based.
struct Detection {
  int frame = 0;
  BBox box;
  double confidence = 0.0;
  std::optional<std::vector<double>> embedding;
  int det_index = 0;  // position within the frame's detection list
};

// Temporally ordered run of detections under one hypothesized identity.
// Construction rejects unsorted or duplicate-frame input instead of sorting,
// so corrupted inputs stay visible.
class Tracklet {
 public:
  Tracklet(int id, std::vector<Detection> detections);

  int id() const { return id_; }
  const std::vector<Detection>& detections() const { return detections_; }
  const Detection& first() const { return detections_.front(); }
  const Detection& last() const { return detections_.back(); }
  int start() const { return detections_.front().frame; }
  int end() const { return detections_.back().frame; }
  int size() const { return static_cast<int>(detections_.size()); }

  Tracklet with_id(int new_id) const { return Tracklet(new_id, detections_); }

 private:
  int id_;
  std::vector<Detection> detections_;
};

// Output of the final hierarchy level; structurally identical to a tracklet.
using Trajectory = Tracklet;

struct GtRecord {
  int frame = 0;
  int identity = 0;
  BBox box;
  double visibility = 1.0;
};

// Detections plus optional ground truth for one video. frames[i] holds the
// detections of frame i+1.
struct SequenceBundle {
  std::string name;
  double fps = 25.0;
  int frame_count = 0;
  std::vector<std::vector<Detection>> frames;
  std::optional<std::vector<GtRecord>> ground_truth;

  // Appends to the detection list of det.frame, assigns det_index, and
  // returns it. The frame must be inside [1, frame_count].
  int add_detection(Detection det);

  const std::vector<Detection>& detections_in(int frame) const;
  int detection_count() const;

  // Dimension of the first embedding found, or 0 when none carry embeddings.
  int embedding_dim() const;
};

// Returns one human-readable message per invariant violation; an empty list
// means the bundle is well formed. Violations are data, not failures.
std::vector<std::string> validate_bundle(const SequenceBundle& bundle);

}  // namespace mot
