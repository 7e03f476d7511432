#include "mot/types.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mot {

bool BBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
         w > 0.0 && h > 0.0;
}

Tracklet::Tracklet(int id, std::vector<Detection> detections)
    : id_(id), detections_(std::move(detections)) {
  if (detections_.empty()) {
    throw std::invalid_argument("tracklet " + std::to_string(id) +
                                ": requires at least one detection");
  }
  for (std::size_t i = 1; i < detections_.size(); ++i) {
    if (detections_[i].frame <= detections_[i - 1].frame) {
      std::ostringstream msg;
      msg << "tracklet " << id << ": frames must be strictly increasing, got "
          << detections_[i - 1].frame << " followed by " << detections_[i].frame;
      throw std::invalid_argument(msg.str());
    }
  }
}

int SequenceBundle::add_detection(Detection det) {
  if (det.frame < 1 || det.frame > frame_count) {
    std::ostringstream msg;
    msg << "detection frame " << det.frame << " outside [1, " << frame_count << "]";
    throw std::invalid_argument(msg.str());
  }
  if (frames.size() != static_cast<std::size_t>(frame_count)) {
    frames.resize(static_cast<std::size_t>(frame_count));
  }
  auto& list = frames[static_cast<std::size_t>(det.frame - 1)];
  det.det_index = static_cast<int>(list.size());
  list.push_back(std::move(det));
  return static_cast<int>(list.size()) - 1;
}

const std::vector<Detection>& SequenceBundle::detections_in(int frame) const {
  static const std::vector<Detection> kEmpty;
  if (frame < 1 || frame > static_cast<int>(frames.size())) return kEmpty;
  return frames[static_cast<std::size_t>(frame - 1)];
}

int SequenceBundle::detection_count() const {
  int n = 0;
  for (const auto& f : frames) n += static_cast<int>(f.size());
  return n;
}

int SequenceBundle::embedding_dim() const {
  for (const auto& f : frames) {
    for (const auto& d : f) {
      if (d.embedding) return static_cast<int>(d.embedding->size());
    }
  }
  return 0;
}

namespace {

std::string det_label(int slot_frame, int index) {
  std::ostringstream s;
  s << "frame " << slot_frame << " detection " << index;
  return s.str();
}

}  // namespace

std::vector<std::string> validate_bundle(const SequenceBundle& bundle) {
  std::vector<std::string> violations;
  auto report = [&violations](const std::string& msg) { violations.push_back(msg); };

  if (!(bundle.fps > 0.0) || !std::isfinite(bundle.fps)) {
    report("fps must be positive and finite, got " + std::to_string(bundle.fps));
  }
  if (bundle.frame_count < 0) {
    report("frame_count must be non-negative, got " + std::to_string(bundle.frame_count));
  }
  if (bundle.frames.size() != static_cast<std::size_t>(bundle.frame_count)) {
    report("frames list has " + std::to_string(bundle.frames.size()) +
           " entries but frame_count is " + std::to_string(bundle.frame_count));
  }

  int d_app = 0;  // first embedding dimension seen becomes the sequence-wide D_app
  for (std::size_t fi = 0; fi < bundle.frames.size(); ++fi) {
    const int slot_frame = static_cast<int>(fi) + 1;
    const auto& list = bundle.frames[fi];
    for (std::size_t di = 0; di < list.size(); ++di) {
      const Detection& det = list[di];
      const std::string label = det_label(slot_frame, static_cast<int>(di));
      if (det.frame < 1 || det.frame > bundle.frame_count) {
        report(label + ": frame " + std::to_string(det.frame) + " outside [1, " +
               std::to_string(bundle.frame_count) + "]");
      } else if (det.frame != slot_frame) {
        report(label + ": stored under frame " + std::to_string(slot_frame) +
               " but carries frame " + std::to_string(det.frame));
      }
      if (det.det_index != static_cast<int>(di)) {
        report(label + ": det_index " + std::to_string(det.det_index) +
               " does not match list position " + std::to_string(di));
      }
      if (!det.box.valid()) {
        report(label + ": box must have positive finite w/h and finite x/y");
      }
      if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
        report(label + ": confidence " + std::to_string(det.confidence) +
               " outside [0, 1]");
      }
      if (det.embedding) {
        const int dim = static_cast<int>(det.embedding->size());
        if (d_app == 0) {
          d_app = dim;
        } else if (dim != d_app) {
          report(label + ": embedding dimension " + std::to_string(dim) +
                 " does not match sequence D_app " + std::to_string(d_app));
        }
      }
    }
  }

  if (bundle.ground_truth) {
    for (std::size_t gi = 0; gi < bundle.ground_truth->size(); ++gi) {
      const GtRecord& rec = (*bundle.ground_truth)[gi];
      if (rec.frame < 1 || rec.frame > bundle.frame_count) {
        report("ground truth record " + std::to_string(gi) + ": frame " +
               std::to_string(rec.frame) + " outside [1, " +
               std::to_string(bundle.frame_count) + "]");
      }
      if (!rec.box.valid()) {
        report("ground truth record " + std::to_string(gi) + ": invalid box");
      }
    }
  }

  return violations;
}

}  // namespace mot
