#pragma once

#include <Eigen/Dense>

#include "mot/types.hpp"

namespace mot {

// Constant-velocity filter over (cx, cy, w, h) and their per-frame velocities.
// All noise scales with the current box height, the usual SORT-family choice.
struct KalmanParams {
  double pos_noise_weight = 1.0 / 20.0;   // process/measurement std per unit height
  double vel_noise_weight = 1.0 / 160.0;  // process std for velocity components
  double init_pos_weight = 1.0 / 10.0;    // initial position std per unit height
  double init_vel_weight = 1.0 / 16.0;    // initial velocity std per unit height
};

struct KalmanState {
  Eigen::Matrix<double, 8, 1> mean;        // cx, cy, w, h, vcx, vcy, vw, vh
  Eigen::Matrix<double, 8, 8> covariance;  // symmetric PSD
};

KalmanState kf_init(const BBox& box, const KalmanParams& params = {});

// Extrapolates `steps` frames ahead, accumulating process noise each step.
KalmanState kf_predict(const KalmanState& state, int steps = 1,
                       const KalmanParams& params = {});

// Joseph-form measurement update. Width/height components of the mean are
// floored at a small positive value so the state always describes a real box.
KalmanState kf_update(const KalmanState& state, const BBox& measurement,
                      const KalmanParams& params = {});

// Axis-aligned box described by the state's first four components.
BBox state_to_box(const KalmanState& state);

// Runs a filter over a tracklet's detections (in the order given, with the
// correct inter-detection step counts) and returns the final state.
KalmanState kf_fit(const std::vector<Detection>& dets,
                   const KalmanParams& params = {});

struct MidframePrediction {
  BBox box_a;    // forward extrapolation of the earlier tracklet
  BBox box_b;    // backward extrapolation of the later tracklet
  double score;  // generalized IoU of the two boxes
};

// Motion-consistency check for a candidate join: extrapolate t_a forward and
// t_b backward (a fresh filter over its detections in reverse time order) to
// the frame halfway across the gap, ties toward t_a's end, and score the
// overlap of the two predicted boxes. Throws std::invalid_argument unless
// t_a ends strictly before t_b starts.
MidframePrediction predict_to_midframe(const Tracklet& t_a, const Tracklet& t_b,
                                       const KalmanParams& params = {});

}  // namespace mot
