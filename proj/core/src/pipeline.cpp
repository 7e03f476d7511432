#include "mot/pipeline.hpp"

#include <utility>

#include "mot/dataio.hpp"
#include "mot/gtmatch.hpp"
#include "mot/rng.hpp"
#include "mot/stage1.hpp"

namespace mot {

std::vector<Tracklet> pipeline_stage1(const SequenceBundle& bundle,
                                      const RunConfig& cfg) {
  return track_sequence(bundle, cfg.stage1);
}

std::vector<Trajectory> pipeline_associate(const SequenceBundle& bundle,
                                           std::vector<Tracklet> tracklets,
                                           const ModelParams& params,
                                           const RunConfig& cfg) {
  std::vector<Trajectory> out = run_hierarchy(
      std::move(tracklets), params, cfg.model, cfg.hierarchy(bundle.fps));
  if (cfg.postprocess.interpolate) {
    for (Trajectory& t : out) t = interpolate(t, cfg.postprocess.max_gap);
  }
  return out;
}

std::vector<TrainSample> pipeline_training_samples(const SequenceBundle& bundle,
                                                   const RunConfig& cfg,
                                                   std::uint64_t stream) {
  const auto attribution = attribute_detections(bundle);
  const HierarchyConfig hcfg = cfg.hierarchy(bundle.fps);
  std::vector<TrainSample> samples;
  if (cfg.augment_enabled) {
    std::vector<std::pair<double, std::vector<Tracklet>>> sets;
    for (double th_c : cfg.augment.th_c_values) {
      Stage1Config s1 = cfg.stage1;
      s1.th_c = th_c;
      sets.emplace_back(th_c, track_sequence(bundle, s1));
    }
    const auto clips =
        augment(bundle, sets, cfg.augment, Rng::mix(cfg.seed, stream));
    for (const AugmentSample& clip : clips) {
      samples.push_back(TrainSample{teacher_levels(
          clip.tracklets, attribution, cfg.hierarchy_levels, hcfg)});
    }
  } else {
    samples.push_back(TrainSample{
        teacher_levels(track_sequence(bundle, cfg.stage1), attribution,
                       cfg.hierarchy_levels, hcfg)});
  }
  return samples;
}

TrainResult pipeline_train(const std::vector<SequenceBundle>& bundles,
                           const RunConfig& cfg) {
  std::vector<TrainSample> samples;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    auto more = pipeline_training_samples(bundles[i], cfg,
                                          static_cast<std::uint64_t>(i));
    for (TrainSample& s : more) samples.push_back(std::move(s));
  }
  ModelParams params = ModelParams::init(cfg.model, cfg.seed);
  return train(samples, std::move(params), cfg.model, cfg.train);
}

}  // namespace mot
