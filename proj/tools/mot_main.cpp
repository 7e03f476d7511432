// Command line front end: synthetic data, both tracking stages, training,
// and evaluation. Data goes to stdout or the named files; progress notes go
// to stderr so outputs stay pipeable.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mot/config.hpp"
#include "mot/dataio.hpp"
#include "mot/metrics.hpp"
#include "mot/pipeline.hpp"
#include "mot/stage1.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "JSON config file");
  sub->add_option("--set", args.overrides,
                  "override one config key, e.g. --set stage1.th_c=0.3");
  sub->add_option("--seed", args.seed, "override the config seed");
  sub->add_option("--jobs", args.jobs, "worker count (reserved, default 1)")
      ->check(CLI::PositiveNumber);
}

mot::RunConfig make_config(const CommonArgs& args) {
  mot::RunConfig cfg;
  if (!args.config_path.empty()) cfg = mot::load_config(args.config_path);
  for (const std::string& assignment : args.overrides)
    mot::apply_override(cfg, assignment);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

mot::SequenceBundle load_sequence(const std::string& det_path,
                                  const std::string& emb_path,
                                  const std::string& gt_path, double fps) {
  mot::SequenceBundle bundle = mot::read_mot_detections(det_path, fps);
  if (!gt_path.empty()) {
    auto gt = mot::read_mot_gt(gt_path);
    for (const mot::GtRecord& rec : gt)
      if (rec.frame > bundle.frame_count) bundle.frame_count = rec.frame;
    bundle.frames.resize(static_cast<std::size_t>(bundle.frame_count));
    bundle.ground_truth = std::move(gt);
  }
  if (!emb_path.empty()) mot::read_embeddings(emb_path, bundle);
  return bundle;
}

// Training data layout: a directory per sequence holding det.txt, gt.txt,
// emb.csv, and optionally meta.json with fps/frame_count.
mot::SequenceBundle load_bundle_dir(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root / "det.txt"))
    throw std::runtime_error(dir + ": missing det.txt");
  double fps = 25.0;
  int frame_count_hint = 0;
  const fs::path meta = root / "meta.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    json j = json::parse(in);
    if (j.contains("fps")) fps = j["fps"].get<double>();
    if (j.contains("frame_count")) frame_count_hint = j["frame_count"].get<int>();
  }
  const fs::path gt = root / "gt.txt";
  const fs::path emb = root / "emb.csv";
  mot::SequenceBundle bundle =
      load_sequence((root / "det.txt").string(),
                    fs::exists(emb) ? emb.string() : std::string(),
                    fs::exists(gt) ? gt.string() : std::string(), fps);
  if (frame_count_hint > bundle.frame_count) {
    bundle.frame_count = frame_count_hint;
    bundle.frames.resize(static_cast<std::size_t>(frame_count_hint));
  }
  bundle.name = root.filename().string();
  return bundle;
}

// Re-links rows of a tracklet file to the detections they were cut from, so
// the second stage sees the embeddings. Boxes are written in shortest
// round-tripping form, so equality is exact.
std::vector<mot::Tracklet> rebind_tracklets(
    const mot::SequenceBundle& bundle,
    const std::vector<mot::Trajectory>& loaded) {
  using Key = std::tuple<int, double, double, double, double, double>;
  std::map<Key, std::vector<int>> slots;
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    for (const mot::Detection& det : bundle.detections_in(frame)) {
      slots[{frame, det.box.x, det.box.y, det.box.w, det.box.h,
             det.confidence}]
          .push_back(det.det_index);
    }
  }
  std::vector<mot::Tracklet> out;
  out.reserve(loaded.size());
  for (const mot::Trajectory& t : loaded) {
    std::vector<mot::Detection> dets;
    dets.reserve(t.detections().size());
    for (const mot::Detection& row : t.detections()) {
      const Key key{row.frame, row.box.x, row.box.y, row.box.w, row.box.h,
                    row.confidence};
      auto it = slots.find(key);
      if (it == slots.end() || it->second.empty()) {
        std::ostringstream os;
        os << "tracklet " << t.id() << ": no detection matches its box in frame "
           << row.frame << " (was the same detection file supplied?)";
        throw std::runtime_error(os.str());
      }
      const int det_index = it->second.front();
      it->second.erase(it->second.begin());
      dets.push_back(
          bundle.frames[static_cast<std::size_t>(row.frame) - 1]
                       [static_cast<std::size_t>(det_index)]);
    }
    out.emplace_back(t.id(), std::move(dets));
  }
  return out;
}

void emit_report(const mot::EvalReport& report) {
  std::cout << mot::report_to_json(report);
  std::cerr << mot::report_to_table(report);
}

int run(int argc, char** argv) {
  CLI::App app{"two-stage multi-object tracker"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
  CommonArgs synth_common;
  std::string synth_out;
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "output directory")->required();

  // track
  auto* track = app.add_subcommand("track", "first stage: detections to tracklets");
  CommonArgs track_common;
  std::string track_det, track_emb, track_out;
  double track_fps = 25.0;
  add_common(track, track_common);
  track->add_option("--det", track_det, "detection file")->required();
  track->add_option("--emb", track_emb, "embedding file");
  track->add_option("--fps", track_fps, "frames per second");
  track->add_option("--out", track_out, "tracklet output file")->required();

  // train
  auto* train = app.add_subcommand("train", "train the merge classifier");
  CommonArgs train_common;
  std::vector<std::string> train_dirs;
  std::string train_out;
  add_common(train, train_common);
  train->add_option("--data", train_dirs, "sequence directories")->required();
  train->add_option("--out", train_out, "checkpoint output path")->required();

  // associate
  auto* assoc = app.add_subcommand(
      "associate", "second stage: merge tracklets into trajectories");
  CommonArgs assoc_common;
  std::string assoc_det, assoc_emb, assoc_tracklets, assoc_ckpt, assoc_out;
  double assoc_fps = 25.0;
  add_common(assoc, assoc_common);
  assoc->add_option("--det", assoc_det, "detection file")->required();
  assoc->add_option("--emb", assoc_emb, "embedding file")->required();
  assoc->add_option("--tracklets", assoc_tracklets, "first-stage output")
      ->required();
  assoc->add_option("--ckpt", assoc_ckpt, "model checkpoint")->required();
  assoc->add_option("--fps", assoc_fps, "frames per second");
  assoc->add_option("--out", assoc_out, "trajectory output file")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "score trajectories against ground truth");
  CommonArgs eval_common;
  std::string eval_tracks, eval_gt;
  add_common(eval, eval_common);
  eval->add_option("--tracks", eval_tracks, "trajectory file")->required();
  eval->add_option("--gt", eval_gt, "ground-truth file")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline",
                                  "track, associate, and evaluate in one go");
  CommonArgs pipe_common;
  std::string pipe_det, pipe_emb, pipe_gt, pipe_ckpt, pipe_out;
  double pipe_fps = 25.0;
  add_common(pipe, pipe_common);
  pipe->add_option("--det", pipe_det, "detection file")->required();
  pipe->add_option("--emb", pipe_emb, "embedding file")->required();
  pipe->add_option("--gt", pipe_gt, "ground-truth file (enables evaluation)");
  pipe->add_option("--ckpt", pipe_ckpt, "model checkpoint")->required();
  pipe->add_option("--fps", pipe_fps, "frames per second");
  pipe->add_option("--out", pipe_out, "trajectory output file")->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    mot::RunConfig cfg = make_config(synth_common);
    cfg.synth.seed = cfg.seed;
    const mot::SequenceBundle bundle = mot::generate(cfg.synth);
    fs::create_directories(synth_out);
    const fs::path root(synth_out);
    mot::write_mot_detections((root / "det.txt").string(), bundle);
    mot::write_mot_gt((root / "gt.txt").string(), *bundle.ground_truth);
    mot::write_embeddings((root / "emb.csv").string(), bundle);
    json meta;
    meta["name"] = bundle.name;
    meta["seed"] = cfg.seed;
    meta["fps"] = bundle.fps;
    meta["frame_count"] = bundle.frame_count;
    meta["num_identities"] = cfg.synth.num_identities;
    meta["d_app"] = cfg.synth.d_app;
    std::ofstream meta_out(root / "meta.json", std::ios::binary);
    meta_out << meta.dump(2) << "\n";
    std::cerr << "synth: wrote " << synth_out << " (" << bundle.frame_count
              << " frames, " << bundle.detection_count() << " detections)\n";
    return 0;
  }

  if (track->parsed()) {
    mot::RunConfig cfg = make_config(track_common);
    const mot::SequenceBundle bundle =
        load_sequence(track_det, track_emb, "", track_fps);
    const auto tracklets = mot::pipeline_stage1(bundle, cfg);
    mot::write_mot_trajectories(track_out, tracklets);
    std::cerr << "track: " << tracklets.size() << " tracklets from "
              << bundle.detection_count() << " detections\n";
    return 0;
  }

  if (train->parsed()) {
    mot::RunConfig cfg = make_config(train_common);
    std::vector<mot::SequenceBundle> bundles;
    for (const std::string& dir : train_dirs) {
      bundles.push_back(load_bundle_dir(dir));
      if (!bundles.back().ground_truth)
        throw std::runtime_error(dir + ": training needs gt.txt");
    }
    const mot::TrainResult result = mot::pipeline_train(bundles, cfg);
    mot::save_checkpoint(train_out, result.params, cfg.model);
    std::cerr << "train: " << result.epochs_run << " epochs, final loss "
              << (result.loss_history.empty() ? 0.0
                                              : result.loss_history.back())
              << ", checkpoint " << train_out << "\n";
    return 0;
  }

  if (assoc->parsed()) {
    mot::RunConfig cfg = make_config(assoc_common);
    const mot::SequenceBundle bundle =
        load_sequence(assoc_det, assoc_emb, "", assoc_fps);
    const auto loaded = mot::read_mot_trajectories(assoc_tracklets);
    auto tracklets = rebind_tracklets(bundle, loaded);
    auto [params, model_cfg] = mot::load_checkpoint(assoc_ckpt);
    cfg.model = model_cfg;
    const auto trajectories =
        mot::pipeline_associate(bundle, std::move(tracklets), params, cfg);
    mot::write_mot_trajectories(assoc_out, trajectories);
    std::cerr << "associate: " << loaded.size() << " tracklets -> "
              << trajectories.size() << " trajectories\n";
    return 0;
  }

  if (eval->parsed()) {
    make_config(eval_common);  // validates --config/--set even though unused
    const auto trajectories = mot::read_mot_trajectories(eval_tracks);
    const auto gt = mot::read_mot_gt(eval_gt);
    emit_report(mot::evaluate(gt, trajectories));
    return 0;
  }

  if (pipe->parsed()) {
    mot::RunConfig cfg = make_config(pipe_common);
    const mot::SequenceBundle bundle =
        load_sequence(pipe_det, pipe_emb, pipe_gt, pipe_fps);
    auto [params, model_cfg] = mot::load_checkpoint(pipe_ckpt);
    cfg.model = model_cfg;
    auto tracklets = mot::pipeline_stage1(bundle, cfg);
    std::cerr << "pipeline: " << tracklets.size() << " tracklets\n";
    const auto trajectories =
        mot::pipeline_associate(bundle, std::move(tracklets), params, cfg);
    mot::write_mot_trajectories(pipe_out, trajectories);
    std::cerr << "pipeline: " << trajectories.size() << " trajectories -> "
              << pipe_out << "\n";
    if (!pipe_gt.empty())
      emit_report(mot::evaluate(*bundle.ground_truth, trajectories));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "mot: " << e.what() << "\n";
    return 1;
  }
}
