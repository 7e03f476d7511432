#include "mot/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mot/geometry.hpp"

namespace mot {

namespace {

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Internal mutable track record for the frame loop.
struct ActiveTrack {
  std::vector<Detection> dets;
  KalmanState state;
  int misses = 0;       // consecutive unmatched frames
  int birth_order = 0;  // global creation counter, breaks start-frame ties
};

void match_round(std::vector<ActiveTrack*>& tracks,
                 std::vector<const Detection*>& dets, const Stage1Config& cfg,
                 int frame, std::vector<ActiveTrack*>& leftover_tracks,
                 std::vector<const Detection*>& leftover_dets) {
  if (tracks.empty() || dets.empty()) {
    leftover_tracks.insert(leftover_tracks.end(), tracks.begin(), tracks.end());
    leftover_dets.insert(leftover_dets.end(), dets.begin(), dets.end());
    return;
  }
  std::vector<TrackSnapshot> snaps(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    snaps[i].predicted_box = state_to_box(tracks[i]->state);
    const auto& emb = tracks[i]->dets.back().embedding;
    snaps[i].embedding = emb ? &*emb : nullptr;
  }
  std::vector<Detection> det_values;
  det_values.reserve(dets.size());
  for (const Detection* d : dets) det_values.push_back(*d);

  const AssignmentResult result =
      solve_assignment(build_cost_matrix(snaps, det_values, cfg));

  std::vector<char> track_used(tracks.size(), 0), det_used(dets.size(), 0);
  for (const auto& [r, c] : result.matches) {
    ActiveTrack* t = tracks[r];
    Detection d = *dets[c];
    d.frame = frame;
    t->dets.push_back(d);
    t->state = kf_update(t->state, d.box, cfg.kalman);
    t->misses = 0;
    track_used[r] = 1;
    det_used[c] = 1;
  }
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!track_used[i]) leftover_tracks.push_back(tracks[i]);
  }
  for (std::size_t j = 0; j < dets.size(); ++j) {
    if (!det_used[j]) leftover_dets.push_back(dets[j]);
  }
}

}  // namespace

CostMatrix build_cost_matrix(const std::vector<TrackSnapshot>& tracks,
                             const std::vector<Detection>& dets,
                             const Stage1Config& cfg) {
  CostMatrix m(tracks.size(), dets.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    for (std::size_t j = 0; j < dets.size(); ++j) {
      const double motion_cost = 1.0 - iou(tracks[i].predicted_box, dets[j].box);
      double cost = motion_cost;
      if (cfg.cost_mode != CostMode::kIou) {
        if (tracks[i].embedding == nullptr || !dets[j].embedding) {
          std::ostringstream os;
          os << "build_cost_matrix: fused cost modes need embeddings on both "
                "sides; missing for track "
             << i << " / detection " << j;
          throw std::invalid_argument(os.str());
        }
        const double cos = cosine_similarity(*tracks[i].embedding,
                                             *dets[j].embedding);
        const double app_cost =
            std::clamp((1.0 - cos) / 2.0, 0.0, 1.0);
        cost = cfg.cost_mode == CostMode::kFusedMin
                   ? std::min(motion_cost, app_cost)
                   : cfg.fuse_weight * motion_cost +
                         (1.0 - cfg.fuse_weight) * app_cost;
      }
      m.at(i, j) = cost > cfg.th_c ? kForbidden : cost;
    }
  }
  return m;
}

std::vector<Tracklet> track_sequence(const SequenceBundle& bundle,
                                     const Stage1Config& cfg) {
  if (!(cfg.th_c > 0.0) || cfg.th_c > 1.0) {
    throw std::invalid_argument("track_sequence: th_c must lie in (0, 1]");
  }
  std::vector<ActiveTrack> storage;   // stable via deque-like reserve
  std::vector<ActiveTrack> finished;
  std::vector<ActiveTrack> active;
  int birth_counter = 0;

  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    for (ActiveTrack& t : active) t.state = kf_predict(t.state, 1, cfg.kalman);

    std::vector<const Detection*> high, low;
    for (const Detection& d : bundle.detections_in(frame)) {
      if (d.confidence < cfg.min_confidence) continue;
      if (cfg.byte_two_round && d.confidence < cfg.high_conf_split) {
        low.push_back(&d);
      } else {
        high.push_back(&d);
      }
    }

    std::vector<ActiveTrack*> roster(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) roster[i] = &active[i];

    std::vector<ActiveTrack*> after_r1;
    std::vector<const Detection*> unmatched_dets;
    match_round(roster, high, cfg, frame, after_r1, unmatched_dets);

    std::vector<ActiveTrack*> after_r2;
    match_round(after_r1, low, cfg, frame, after_r2, unmatched_dets);

    for (ActiveTrack* t : after_r2) t->misses += 1;

    for (const Detection* d : unmatched_dets) {
      ActiveTrack t;
      Detection det = *d;
      det.frame = frame;
      t.dets.push_back(det);
      t.state = kf_init(det.box, cfg.kalman);
      t.birth_order = birth_counter++;
      storage.push_back(std::move(t));
    }

    std::vector<ActiveTrack> survivors;
    survivors.reserve(active.size() + storage.size());
    for (ActiveTrack& t : active) {
      if (t.misses > cfg.max_age) finished.push_back(std::move(t));
      else survivors.push_back(std::move(t));
    }
    for (ActiveTrack& t : storage) survivors.push_back(std::move(t));
    storage.clear();
    active = std::move(survivors);
  }

  for (ActiveTrack& t : active) finished.push_back(std::move(t));
  std::sort(finished.begin(), finished.end(),
            [](const ActiveTrack& a, const ActiveTrack& b) {
              if (a.dets.front().frame != b.dets.front().frame) {
                return a.dets.front().frame < b.dets.front().frame;
              }
              return a.birth_order < b.birth_order;
            });

  std::vector<Tracklet> out;
  out.reserve(finished.size());
  for (std::size_t i = 0; i < finished.size(); ++i) {
    out.emplace_back(static_cast<int>(i) + 1, std::move(finished[i].dets));
  }
  return out;
}

}  // namespace mot
