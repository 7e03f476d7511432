#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mot/config.hpp"

using namespace mot;

TEST_CASE("dumping and reparsing is a fixed point over every key") {
  const RunConfig defaults;
  const std::string dump = config_to_json(defaults);
  CHECK(dump.back() == '\n');
  CHECK(dump.rfind("{\n  \"seed\"", 0) == 0);  // seed leads the dump

  CHECK(config_to_json(parse_config(dump)) == dump);

  // Feed every dumped key through apply_override; the dump must survive.
  const auto j = nlohmann::json::parse(dump);
  RunConfig rebuilt;
  int keys = 0;
  for (const auto& [section, value] : j.items()) {
    if (!value.is_object()) {
      apply_override(rebuilt, section + "=" + value.dump());
      ++keys;
      continue;
    }
    for (const auto& [key, v] : value.items()) {
      apply_override(rebuilt, section + "." + key + "=" + v.dump());
      ++keys;
    }
  }
  CHECK(keys == 73);  // the full key registry
  CHECK(config_to_json(rebuilt) == dump);
}

TEST_CASE("parsed sections land on the right fields") {
  const RunConfig cfg = parse_config(R"({
    "seed": 42,
    "stage1": {"th_c": 0.35, "max_age": 7, "cost_mode": "fused_weighted",
               "fuse_weight": 0.25, "byte_two_round": false,
               "pos_noise_weight": 0.11},
    "graph": {"k": 9, "l_app": 4, "w_space": 2.5},
    "model": {"hl": 2, "node_hidden": 48, "message_uses_neighbor": false},
    "train": {"epochs": 17, "lr": 0.004, "weight_decay": 0.02},
    "hierarchy": {"threshold": 0.62, "levels": 2},
    "postprocess": {"interpolate": false, "max_gap": 5},
    "synth": {"num_identities": 3, "fp_rate": 0.0},
    "augment": {"enabled": true, "th_c_values": [0.2, 0.4]}
  })");

  CHECK(cfg.seed == 42);
  CHECK(cfg.stage1.th_c == 0.35);
  CHECK(cfg.stage1.max_age == 7);
  CHECK(cfg.stage1.cost_mode == CostMode::kFusedWeighted);
  CHECK(cfg.stage1.fuse_weight == 0.25);
  CHECK(cfg.stage1.byte_two_round == false);
  CHECK(cfg.stage1.kalman.pos_noise_weight == 0.11);
  CHECK(cfg.graph.K == 9);
  CHECK(cfg.graph.L_app == 4);
  CHECK(cfg.graph.w_space == 2.5);
  CHECK(cfg.model.hl == 2);
  CHECK(cfg.model.node_hidden == 48);
  CHECK(cfg.model.message_uses_neighbor == false);
  CHECK(cfg.train.epochs == 17);
  CHECK(cfg.train.adam.lr == 0.004);
  CHECK(cfg.train.adam.weight_decay == 0.02);
  CHECK(cfg.hierarchy_threshold == 0.62);
  CHECK(cfg.hierarchy_levels == 2);
  CHECK(cfg.postprocess.interpolate == false);
  CHECK(cfg.postprocess.max_gap == 5);
  CHECK(cfg.synth.num_identities == 3);
  CHECK(cfg.synth.fp_rate == 0.0);
  CHECK(cfg.augment_enabled == true);
  CHECK(cfg.augment.th_c_values == std::vector<double>{0.2, 0.4});

  // Untouched keys keep their defaults.
  const RunConfig defaults;
  CHECK(cfg.stage1.min_confidence == defaults.stage1.min_confidence);
  CHECK(cfg.model.l_mp == defaults.model.l_mp);
  CHECK(cfg.synth.frame_count == defaults.synth.frame_count);
}

TEST_CASE("overrides parse JSON values and bare words") {
  RunConfig cfg;
  apply_override(cfg, "stage1.th_c=0.25");
  CHECK(cfg.stage1.th_c == 0.25);
  apply_override(cfg, "stage1.max_age=7");
  CHECK(cfg.stage1.max_age == 7);
  apply_override(cfg, "stage1.byte_two_round=false");
  CHECK(cfg.stage1.byte_two_round == false);
  apply_override(cfg, "stage1.cost_mode=fused_min");  // bare word
  CHECK(cfg.stage1.cost_mode == CostMode::kFusedMin);
  apply_override(cfg, "stage1.cost_mode=\"iou\"");  // quoted JSON string
  CHECK(cfg.stage1.cost_mode == CostMode::kIou);
  apply_override(cfg, "augment.th_c_values=[0.1,0.3]");
  CHECK(cfg.augment.th_c_values == std::vector<double>{0.1, 0.3});
  apply_override(cfg, "seed=99");
  CHECK(cfg.seed == 99);

  CHECK_THROWS_WITH_AS(apply_override(cfg, "stage1.th_c"),
                       doctest::Contains("must look like section.key=value"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "=5"),
                       doctest::Contains("must look like"), std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "stage1.foo=1"),
                       doctest::Contains("unknown key 'stage1.foo'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "stage1.max_age=2.5"),
                       doctest::Contains("must be an integer"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "stage1.th_c=fast"),
                       doctest::Contains("must be a number"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "stage1.byte_two_round=1"),
                       doctest::Contains("must be true or false"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "seed=-3"),
                       doctest::Contains("non-negative"), std::runtime_error);
  CHECK_THROWS_WITH_AS(apply_override(cfg, "augment.th_c_values=0.3"),
                       doctest::Contains("array of numbers"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(
      apply_override(cfg, "stage1.cost_mode=nearest"),
      doctest::Contains("\"iou\", \"fused_min\", \"fused_weighted\""),
      std::runtime_error);
}

TEST_CASE("malformed documents are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config("[1,2]"),
                       doctest::Contains("top level must be a JSON object"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("{\"stagex\": {}}"),
                       doctest::Contains("unknown key 'stagex'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("{\"stage1\": 3}"),
                       doctest::Contains("section 'stage1' must be an object"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("{\"stage1\": {\"foo\": 1}}"),
                       doctest::Contains("unknown key 'stage1.foo'"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config("{nope"), doctest::Contains("config:"),
                       std::runtime_error);
}

TEST_CASE("configs load from disk with the path in any error") {
  const std::string path = "config_test_tmp.json";
  {
    std::ofstream out(path);
    out << "{\"stage1\": {\"th_c\": 0.15}}\n";
  }
  const RunConfig cfg = load_config(path);
  CHECK(cfg.stage1.th_c == 0.15);

  {
    std::ofstream out(path);
    out << "{broken\n";
  }
  CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains(path.c_str()),
                       std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("cannot open"),
                       std::runtime_error);
}

TEST_CASE("the merge stage borrows its settings from the run") {
  RunConfig cfg;
  cfg.hierarchy_threshold = 0.62;
  cfg.hierarchy_levels = 2;
  cfg.graph.K = 9;
  const HierarchyConfig h = cfg.hierarchy(30.0);
  CHECK(h.threshold == 0.62);
  CHECK(h.levels == 2);
  CHECK(h.fps == 30.0);
  CHECK(h.graph.K == 9);
}
