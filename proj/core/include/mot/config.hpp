#pragma once

#include <cstdint>
#include <string>

#include "mot/dataio.hpp"
#include "mot/hierarchy.hpp"
#include "mot/model.hpp"
#include "mot/stage1.hpp"
#include "mot/tgraph.hpp"

namespace mot {

struct PostprocessConfig {
  bool interpolate = true;
  int max_gap = 20;  // longest frame gap filled by interpolation
};

// Everything a run needs, grouped the same way as the JSON config file:
// top-level "seed" plus the sections stage1, graph, model, train, hierarchy,
// postprocess, synth, and augment. Unknown keys are rejected by name.
struct RunConfig {
  std::uint64_t seed = 1;
  Stage1Config stage1;
  GraphConfig graph;
  MpnnConfig model;
  TrainConfig train;
  double hierarchy_threshold = 0.5;
  int hierarchy_levels = 3;
  PostprocessConfig postprocess;
  SynthConfig synth;
  bool augment_enabled = false;
  AugmentConfig augment;

  // Assembled on demand; fps comes from the sequence being processed.
  HierarchyConfig hierarchy(double fps) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Applies one "section.key=value" assignment (values use JSON syntax; bare
// words are taken as strings).
void apply_override(RunConfig& cfg, const std::string& assignment);

// Pretty-printed dump of every known key; feeding it back through
// parse_config reproduces the same configuration.
std::string config_to_json(const RunConfig& cfg);

}  // namespace mot
