#include "mot/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mot/geometry.hpp"

namespace mot {

namespace {

constexpr double kMinExtent = 1e-6;

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;
using Mat84 = Eigen::Matrix<double, 8, 4>;

Mat8 transition() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

Mat8 process_noise(double height, const KalmanParams& p) {
  const double sp = p.pos_noise_weight * height;
  const double sv = p.vel_noise_weight * height;
  Vec8 d;
  d << sp * sp, sp * sp, sp * sp, sp * sp, sv * sv, sv * sv, sv * sv, sv * sv;
  return d.asDiagonal();
}

void clamp_extent(Vec8& mean) {
  mean(2) = std::max(mean(2), kMinExtent);
  mean(3) = std::max(mean(3), kMinExtent);
}

}  // namespace

KalmanState kf_init(const BBox& box, const KalmanParams& params) {
  if (!box.valid()) throw std::invalid_argument("kf_init: invalid box");
  KalmanState s;
  s.mean << box.cx(), box.cy(), box.w, box.h, 0.0, 0.0, 0.0, 0.0;
  const double sp = params.init_pos_weight * box.h;
  const double sv = params.init_vel_weight * box.h;
  Vec8 d;
  d << sp * sp, sp * sp, sp * sp, sp * sp, sv * sv, sv * sv, sv * sv, sv * sv;
  s.covariance = d.asDiagonal();
  return s;
}

KalmanState kf_predict(const KalmanState& state, int steps,
                       const KalmanParams& params) {
  if (steps < 1) throw std::invalid_argument("kf_predict: steps must be >= 1");
  static const Mat8 f = transition();
  KalmanState s = state;
  for (int i = 0; i < steps; ++i) {
    const Mat8 q = process_noise(s.mean(3), params);
    s.mean = f * s.mean;
    clamp_extent(s.mean);
    s.covariance = f * s.covariance * f.transpose() + q;
    s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  }
  return s;
}

KalmanState kf_update(const KalmanState& state, const BBox& measurement,
                      const KalmanParams& params) {
  if (!measurement.valid()) {
    throw std::invalid_argument("kf_update: invalid measurement");
  }
  Mat48 h = Mat48::Zero();
  h.leftCols<4>() = Mat4::Identity();

  const double sr = params.pos_noise_weight * state.mean(3);
  const Mat4 r = (Vec4::Constant(sr * sr)).asDiagonal();

  Vec4 z;
  z << measurement.cx(), measurement.cy(), measurement.w, measurement.h;

  Mat4 innov_cov = h * state.covariance * h.transpose() + r;
  // Noise-free states can drive the innovation covariance to exactly zero; a
  // vanishing ridge keeps the solve defined and sends the gain to zero there.
  innov_cov += Mat4::Identity() * (1e-12 * std::max(1.0, innov_cov.trace()));

  const Mat84 gain =
      innov_cov.ldlt().solve(h * state.covariance).transpose();

  KalmanState s;
  s.mean = state.mean + gain * (z - h * state.mean);
  clamp_extent(s.mean);
  const Mat8 ikh = Mat8::Identity() - gain * h;
  s.covariance = ikh * state.covariance * ikh.transpose() +
                 gain * r * gain.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  return s;
}

BBox state_to_box(const KalmanState& state) {
  const double w = state.mean(2);
  const double h = state.mean(3);
  return BBox{state.mean(0) - 0.5 * w, state.mean(1) - 0.5 * h, w, h};
}

KalmanState kf_fit(const std::vector<Detection>& dets,
                   const KalmanParams& params) {
  if (dets.empty()) throw std::invalid_argument("kf_fit: no detections");
  KalmanState s = kf_init(dets.front().box, params);
  for (std::size_t i = 1; i < dets.size(); ++i) {
    const int steps = std::abs(dets[i].frame - dets[i - 1].frame);
    if (steps < 1) throw std::invalid_argument("kf_fit: repeated frame");
    s = kf_predict(s, steps, params);
    s = kf_update(s, dets[i].box, params);
  }
  return s;
}

MidframePrediction predict_to_midframe(const Tracklet& t_a, const Tracklet& t_b,
                                       const KalmanParams& params) {
  if (t_a.end() >= t_b.start()) {
    std::ostringstream os;
    os << "predict_to_midframe: tracklets overlap in time (first ends at "
       << t_a.end() << ", second starts at " << t_b.start() << ")";
    throw std::invalid_argument(os.str());
  }
  const int gap = t_b.start() - t_a.end();
  const int t_mid = t_a.end() + gap / 2;  // ties toward t_a

  KalmanState fwd = kf_fit(t_a.detections(), params);
  if (t_mid > t_a.end()) fwd = kf_predict(fwd, t_mid - t_a.end(), params);

  std::vector<Detection> reversed(t_b.detections().rbegin(),
                                  t_b.detections().rend());
  KalmanState bwd = kf_fit(reversed, params);
  bwd = kf_predict(bwd, t_b.start() - t_mid, params);

  MidframePrediction out;
  out.box_a = state_to_box(fwd);
  out.box_b = state_to_box(bwd);
  out.score = giou(out.box_a, out.box_b);
  return out;
}

}  // namespace mot
