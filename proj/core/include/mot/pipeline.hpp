#pragma once

#include <cstdint>
#include <vector>

#include "mot/config.hpp"
#include "mot/hierarchy.hpp"
#include "mot/model.hpp"
#include "mot/types.hpp"

namespace mot {

// First stage under the configured association threshold.
std::vector<Tracklet> pipeline_stage1(const SequenceBundle& bundle,
                                      const RunConfig& cfg);

// Second stage plus optional gap interpolation.
std::vector<Trajectory> pipeline_associate(const SequenceBundle& bundle,
                                           std::vector<Tracklet> tracklets,
                                           const ModelParams& params,
                                           const RunConfig& cfg);

// Teacher-forced training samples for one annotated sequence. With
// augmentation enabled this is the clip/threshold cross product; otherwise
// one sample built from the configured first stage. `stream` keeps different
// sequences on different random streams under the same seed.
std::vector<TrainSample> pipeline_training_samples(const SequenceBundle& bundle,
                                                   const RunConfig& cfg,
                                                   std::uint64_t stream);

// Initializes from cfg.seed and trains on all bundles' samples.
TrainResult pipeline_train(const std::vector<SequenceBundle>& bundles,
                           const RunConfig& cfg);

}  // namespace mot
