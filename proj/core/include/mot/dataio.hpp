#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mot/types.hpp"

namespace mot {

// ---- MOT-style CSV files ----------------------------------------------
//
// Detections: frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1
//             (id is -1 for raw detections, a track id for results)
// Ground truth: frame,id,bb_left,bb_top,bb_width,bb_height,flag,class,vis
//
// Numbers are written in their shortest round-tripping decimal form, so
// reading a file this module wrote and writing it again is byte-identical.
// Parse errors name the file, 1-based line, and the offending content.

SequenceBundle read_mot_detections(const std::string& path, double fps = 25.0);
void write_mot_detections(const std::string& path,
                          const SequenceBundle& bundle);

std::vector<GtRecord> read_mot_gt(const std::string& path);
void write_mot_gt(const std::string& path, const std::vector<GtRecord>& gt);

std::vector<Trajectory> read_mot_trajectories(const std::string& path);
void write_mot_trajectories(const std::string& path,
                            const std::vector<Trajectory>& trajectories);

// ---- Embedding sidecar -------------------------------------------------
//
// Header: frame,det_index,f0,...,f{D-1}; one row per embedded detection.
// Rows attach to bundle detections by (frame, det_index); detections without
// a row keep no embedding.

void read_embeddings(const std::string& path, SequenceBundle& bundle);
void write_embeddings(const std::string& path, const SequenceBundle& bundle);

// ---- Synthetic sequences -----------------------------------------------

struct SynthConfig {
  std::uint64_t seed = 1;
  int num_identities = 12;
  int frame_count = 400;
  double fps = 25.0;
  double image_width = 640.0;
  double image_height = 480.0;
  double min_speed = 0.5;   // px/frame
  double max_speed = 3.0;
  double accel_noise_std = 0.05;
  double min_box_w = 18.0;
  double max_box_w = 36.0;
  double aspect_min = 1.6;  // box height = aspect * width
  double aspect_max = 2.4;
  double det_noise_std = 1.0;  // px, on every box coordinate
  double miss_prob = 0.1;
  int occlusion_count = 4;
  int occlusion_min_len = 8;
  int occlusion_max_len = 20;
  double fp_rate = 0.5;  // Poisson mean false positives per frame
  int d_app = 16;
  double emb_noise_std = 0.1;
  double det_conf_min = 0.7;  // real detections
  double det_conf_max = 1.0;
  double fp_conf_min = 0.2;  // false positives
  double fp_conf_max = 0.6;
};

// Identities follow noisy constant-velocity paths, reflecting off the image
// border. Ground truth covers every identity in every frame (visibility 0
// while an occlusion event suppresses its detections). Each visible identity
// emits one noisy detection per frame with probability 1 - miss_prob, with
// an embedding = its fixed random unit vector plus noise, renormalized;
// false positives are uniform boxes with independent unit embeddings.
// Everything derives from the seed.
SequenceBundle generate(const SynthConfig& cfg);

// ---- Training-time augmentation ----------------------------------------

struct AugmentConfig {
  int stride = 50;            // one clip anchor every this many frames
  int jitter = 15;            // uniform shift applied to each anchor
  double min_fraction = 0.25;  // clip length relative to the sequence
  double max_fraction = 1.0;
  std::vector<double> th_c_values = {0.1, 0.2, 0.3, 0.4, 0.5};
  int min_clip_frames = 10;  // shorter windows are dropped
};

struct AugmentSample {
  int clip_start = 1;  // inclusive frame window
  int clip_end = 1;
  double th_c = 0.0;   // which first-stage variant supplied the tracklets
  std::vector<Tracklet> tracklets;  // cropped to the window, original ids
};

// Video-level clips (one jittered window per anchor, random length) crossed
// with tracklet-level variants (one tracklet set per configured threshold).
// Tracklets are cut down to the window; empty cuts vanish. Windows are drawn
// once from `seed` and shared across all variants.
std::vector<AugmentSample> augment(
    const SequenceBundle& bundle,
    const std::vector<std::pair<double, std::vector<Tracklet>>>&
        tracklets_per_th_c,
    const AugmentConfig& cfg, std::uint64_t seed);

}  // namespace mot
