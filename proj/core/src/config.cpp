#include "mot/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace mot {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw std::runtime_error("config: " + what);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) bad("'" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad("'" + key + "' must be an integer");
  return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
    bad("'" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) bad("'" + key + "' must be true or false");
  return v.get<bool>();
}

std::vector<double> as_double_list(const json& v, const std::string& key) {
  if (!v.is_array()) bad("'" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) bad("'" + key + "' must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CostMode cost_mode_from(const json& v, const std::string& key) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "iou") return CostMode::kIou;
    if (s == "fused_min") return CostMode::kFusedMin;
    if (s == "fused_weighted") return CostMode::kFusedWeighted;
  }
  bad("'" + key + "' must be one of \"iou\", \"fused_min\", \"fused_weighted\"");
}

std::string cost_mode_name(CostMode mode) {
  switch (mode) {
    case CostMode::kIou: return "iou";
    case CostMode::kFusedMin: return "fused_min";
    case CostMode::kFusedWeighted: return "fused_weighted";
  }
  return "iou";
}

struct Entry {
  std::string key;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

// One entry per config key; `ref` picks the target field out of a RunConfig.
template <typename Ref>
Entry ent_d(std::string key, Ref ref) {
  return {key,
          [ref, key](RunConfig& c, const json& v) { ref(c) = as_double(v, key); },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Ref>
Entry ent_i(std::string key, Ref ref) {
  return {key,
          [ref, key](RunConfig& c, const json& v) { ref(c) = as_int(v, key); },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Ref>
Entry ent_b(std::string key, Ref ref) {
  return {key,
          [ref, key](RunConfig& c, const json& v) { ref(c) = as_bool(v, key); },
          [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); }};
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> r;
    r.push_back({"seed",
                 [](RunConfig& c, const json& v) { c.seed = as_u64(v, "seed"); },
                 [](const RunConfig& c) { return json(c.seed); }});

    r.push_back(ent_d("stage1.th_c", [](RunConfig& c) -> double& { return c.stage1.th_c; }));
    r.push_back(ent_i("stage1.max_age", [](RunConfig& c) -> int& { return c.stage1.max_age; }));
    r.push_back(ent_d("stage1.min_confidence", [](RunConfig& c) -> double& { return c.stage1.min_confidence; }));
    r.push_back({"stage1.cost_mode",
                 [](RunConfig& c, const json& v) { c.stage1.cost_mode = cost_mode_from(v, "stage1.cost_mode"); },
                 [](const RunConfig& c) { return json(cost_mode_name(c.stage1.cost_mode)); }});
    r.push_back(ent_d("stage1.fuse_weight", [](RunConfig& c) -> double& { return c.stage1.fuse_weight; }));
    r.push_back(ent_b("stage1.byte_two_round", [](RunConfig& c) -> bool& { return c.stage1.byte_two_round; }));
    r.push_back(ent_d("stage1.high_conf_split", [](RunConfig& c) -> double& { return c.stage1.high_conf_split; }));
    r.push_back(ent_d("stage1.pos_noise_weight", [](RunConfig& c) -> double& { return c.stage1.kalman.pos_noise_weight; }));
    r.push_back(ent_d("stage1.vel_noise_weight", [](RunConfig& c) -> double& { return c.stage1.kalman.vel_noise_weight; }));
    r.push_back(ent_d("stage1.init_pos_weight", [](RunConfig& c) -> double& { return c.stage1.kalman.init_pos_weight; }));
    r.push_back(ent_d("stage1.init_vel_weight", [](RunConfig& c) -> double& { return c.stage1.kalman.init_vel_weight; }));

    r.push_back(ent_i("graph.k", [](RunConfig& c) -> int& { return c.graph.K; }));
    r.push_back(ent_i("graph.l_app", [](RunConfig& c) -> int& { return c.graph.L_app; }));
    r.push_back(ent_d("graph.w_time", [](RunConfig& c) -> double& { return c.graph.w_time; }));
    r.push_back(ent_d("graph.w_space", [](RunConfig& c) -> double& { return c.graph.w_space; }));
    r.push_back(ent_d("graph.w_app", [](RunConfig& c) -> double& { return c.graph.w_app; }));

    r.push_back(ent_i("model.l_mp", [](RunConfig& c) -> int& { return c.model.l_mp; }));
    r.push_back(ent_i("model.hl", [](RunConfig& c) -> int& { return c.model.hl; }));
    r.push_back(ent_i("model.d_app", [](RunConfig& c) -> int& { return c.model.d_app; }));
    r.push_back(ent_i("model.node_dim", [](RunConfig& c) -> int& { return c.model.node_dim; }));
    r.push_back(ent_i("model.edge_dim", [](RunConfig& c) -> int& { return c.model.edge_dim; }));
    r.push_back(ent_i("model.node_hidden", [](RunConfig& c) -> int& { return c.model.node_hidden; }));
    r.push_back(ent_i("model.edge_hidden", [](RunConfig& c) -> int& { return c.model.edge_hidden; }));
    r.push_back(ent_i("model.edge_update_hidden", [](RunConfig& c) -> int& { return c.model.edge_update_hidden; }));
    r.push_back(ent_i("model.node_update_hidden", [](RunConfig& c) -> int& { return c.model.node_update_hidden; }));
    r.push_back(ent_i("model.classifier_hidden", [](RunConfig& c) -> int& { return c.model.classifier_hidden; }));
    r.push_back(ent_b("model.message_uses_neighbor", [](RunConfig& c) -> bool& { return c.model.message_uses_neighbor; }));
    r.push_back(ent_d("model.init_gain", [](RunConfig& c) -> double& { return c.model.init_gain; }));

    r.push_back(ent_i("train.epochs", [](RunConfig& c) -> int& { return c.train.epochs; }));
    r.push_back(ent_d("train.gamma", [](RunConfig& c) -> double& { return c.train.gamma; }));
    r.push_back(ent_d("train.lr", [](RunConfig& c) -> double& { return c.train.adam.lr; }));
    r.push_back(ent_d("train.beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; }));
    r.push_back(ent_d("train.beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; }));
    r.push_back(ent_d("train.eps", [](RunConfig& c) -> double& { return c.train.adam.eps; }));
    r.push_back(ent_d("train.weight_decay", [](RunConfig& c) -> double& { return c.train.adam.weight_decay; }));
    r.push_back(ent_i("train.patience", [](RunConfig& c) -> int& { return c.train.patience; }));
    r.push_back(ent_d("train.min_delta", [](RunConfig& c) -> double& { return c.train.min_delta; }));

    r.push_back(ent_d("hierarchy.threshold", [](RunConfig& c) -> double& { return c.hierarchy_threshold; }));
    r.push_back(ent_i("hierarchy.levels", [](RunConfig& c) -> int& { return c.hierarchy_levels; }));

    r.push_back(ent_b("postprocess.interpolate", [](RunConfig& c) -> bool& { return c.postprocess.interpolate; }));
    r.push_back(ent_i("postprocess.max_gap", [](RunConfig& c) -> int& { return c.postprocess.max_gap; }));

    r.push_back(ent_i("synth.num_identities", [](RunConfig& c) -> int& { return c.synth.num_identities; }));
    r.push_back(ent_i("synth.frame_count", [](RunConfig& c) -> int& { return c.synth.frame_count; }));
    r.push_back(ent_d("synth.fps", [](RunConfig& c) -> double& { return c.synth.fps; }));
    r.push_back(ent_d("synth.image_width", [](RunConfig& c) -> double& { return c.synth.image_width; }));
    r.push_back(ent_d("synth.image_height", [](RunConfig& c) -> double& { return c.synth.image_height; }));
    r.push_back(ent_d("synth.min_speed", [](RunConfig& c) -> double& { return c.synth.min_speed; }));
    r.push_back(ent_d("synth.max_speed", [](RunConfig& c) -> double& { return c.synth.max_speed; }));
    r.push_back(ent_d("synth.accel_noise_std", [](RunConfig& c) -> double& { return c.synth.accel_noise_std; }));
    r.push_back(ent_d("synth.min_box_w", [](RunConfig& c) -> double& { return c.synth.min_box_w; }));
    r.push_back(ent_d("synth.max_box_w", [](RunConfig& c) -> double& { return c.synth.max_box_w; }));
    r.push_back(ent_d("synth.aspect_min", [](RunConfig& c) -> double& { return c.synth.aspect_min; }));
    r.push_back(ent_d("synth.aspect_max", [](RunConfig& c) -> double& { return c.synth.aspect_max; }));
    r.push_back(ent_d("synth.det_noise_std", [](RunConfig& c) -> double& { return c.synth.det_noise_std; }));
    r.push_back(ent_d("synth.miss_prob", [](RunConfig& c) -> double& { return c.synth.miss_prob; }));
    r.push_back(ent_i("synth.occlusion_count", [](RunConfig& c) -> int& { return c.synth.occlusion_count; }));
    r.push_back(ent_i("synth.occlusion_min_len", [](RunConfig& c) -> int& { return c.synth.occlusion_min_len; }));
    r.push_back(ent_i("synth.occlusion_max_len", [](RunConfig& c) -> int& { return c.synth.occlusion_max_len; }));
    r.push_back(ent_d("synth.fp_rate", [](RunConfig& c) -> double& { return c.synth.fp_rate; }));
    r.push_back(ent_i("synth.d_app", [](RunConfig& c) -> int& { return c.synth.d_app; }));
    r.push_back(ent_d("synth.emb_noise_std", [](RunConfig& c) -> double& { return c.synth.emb_noise_std; }));
    r.push_back(ent_d("synth.det_conf_min", [](RunConfig& c) -> double& { return c.synth.det_conf_min; }));
    r.push_back(ent_d("synth.det_conf_max", [](RunConfig& c) -> double& { return c.synth.det_conf_max; }));
    r.push_back(ent_d("synth.fp_conf_min", [](RunConfig& c) -> double& { return c.synth.fp_conf_min; }));
    r.push_back(ent_d("synth.fp_conf_max", [](RunConfig& c) -> double& { return c.synth.fp_conf_max; }));

    r.push_back(ent_b("augment.enabled", [](RunConfig& c) -> bool& { return c.augment_enabled; }));
    r.push_back(ent_i("augment.stride", [](RunConfig& c) -> int& { return c.augment.stride; }));
    r.push_back(ent_i("augment.jitter", [](RunConfig& c) -> int& { return c.augment.jitter; }));
    r.push_back(ent_d("augment.min_fraction", [](RunConfig& c) -> double& { return c.augment.min_fraction; }));
    r.push_back(ent_d("augment.max_fraction", [](RunConfig& c) -> double& { return c.augment.max_fraction; }));
    r.push_back({"augment.th_c_values",
                 [](RunConfig& c, const json& v) {
                   c.augment.th_c_values = as_double_list(v, "augment.th_c_values");
                 },
                 [](const RunConfig& c) { return json(c.augment.th_c_values); }});
    r.push_back(ent_i("augment.min_clip_frames", [](RunConfig& c) -> int& { return c.augment.min_clip_frames; }));
    return r;
  }();
  return entries;
}

const Entry* find_entry(const std::string& key) {
  for (const Entry& e : registry())
    if (e.key == key) return &e;
  return nullptr;
}

}  // namespace

HierarchyConfig RunConfig::hierarchy(double fps) const {
  HierarchyConfig h;
  h.threshold = hierarchy_threshold;
  h.levels = hierarchy_levels;
  h.fps = fps;
  h.graph = graph;
  return h;
}

namespace {

RunConfig parse_config_json(const json& j) {
  if (!j.is_object()) bad("top level must be a JSON object");
  RunConfig cfg;
  for (const auto& [section, value] : j.items()) {
    if (section == "seed") {
      find_entry("seed")->set(cfg, value);
      continue;
    }
    bool known_section = false;
    for (const Entry& e : registry())
      if (e.key.rfind(section + ".", 0) == 0) known_section = true;
    if (!known_section) bad("unknown key '" + section + "'");
    if (!value.is_object()) bad("section '" + section + "' must be an object");
    for (const auto& [key, v] : value.items()) {
      const std::string full = section + "." + key;
      const Entry* entry = find_entry(full);
      if (entry == nullptr) bad("unknown key '" + full + "'");
      entry->set(cfg, v);
    }
  }
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(e.what());
  }
  return parse_config_json(j);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return parse_config_json(j);
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    bad("override '" + assignment + "' must look like section.key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const Entry* entry = find_entry(key);
  if (entry == nullptr) bad("unknown key '" + key + "'");
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = json(raw);  // bare word: treat as a string
  }
  entry->set(cfg, value);
}

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json out;
  for (const Entry& e : registry()) {
    const std::size_t dot = e.key.find('.');
    if (dot == std::string::npos)
      out[e.key] = e.get(cfg);
    else
      out[e.key.substr(0, dot)][e.key.substr(dot + 1)] = e.get(cfg);
  }
  return out.dump(2) + "\n";
}

}  // namespace mot
