#include "mot/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mot/rng.hpp"

namespace mot {
namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) { return std::to_string(v); }

[[noreturn]] void fail_at(const std::string& path, int line_no,
                          const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line_no << ": " << what;
  throw std::runtime_error(os.str());
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

double parse_double(const std::string& field, const std::string& path,
                    int line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(value))
    fail_at(path, line_no, "bad number '" + field + "'");
  return value;
}

int parse_int(const std::string& field, const std::string& path, int line_no) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    fail_at(path, line_no, "bad integer '" + field + "'");
  return value;
}

void require_fields(const std::vector<std::string>& fields, std::size_t want,
                    const std::string& path, int line_no) {
  if (fields.size() != want) {
    std::ostringstream os;
    os << "expected " << want << " fields, got " << fields.size();
    fail_at(path, line_no, os.str());
  }
}

std::string stem_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::string box_fields(const BBox& box) {
  return fmt(box.x) + "," + fmt(box.y) + "," + fmt(box.w) + "," + fmt(box.h);
}

BBox parse_box(const std::vector<std::string>& fields, std::size_t offset,
               const std::string& path, int line_no) {
  BBox box;
  box.x = parse_double(fields[offset + 0], path, line_no);
  box.y = parse_double(fields[offset + 1], path, line_no);
  box.w = parse_double(fields[offset + 2], path, line_no);
  box.h = parse_double(fields[offset + 3], path, line_no);
  return box;
}

}  // namespace

SequenceBundle read_mot_detections(const std::string& path, double fps) {
  const auto lines = read_lines(path);
  struct Row {
    int frame;
    BBox box;
    double conf;
  };
  std::vector<Row> rows;
  int max_frame = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = split_fields(lines[i]);
    require_fields(fields, 10, path, line_no);
    Row row;
    row.frame = parse_int(fields[0], path, line_no);
    if (row.frame < 1) fail_at(path, line_no, "frame must be >= 1");
    parse_int(fields[1], path, line_no);  // id column, -1 for raw detections
    row.box = parse_box(fields, 2, path, line_no);
    row.conf = parse_double(fields[6], path, line_no);
    rows.push_back(row);
    max_frame = std::max(max_frame, row.frame);
  }
  SequenceBundle bundle;
  bundle.name = stem_of(path);
  bundle.fps = fps;
  bundle.frame_count = max_frame;
  bundle.frames.resize(static_cast<std::size_t>(max_frame));
  for (const Row& row : rows) {
    Detection det;
    det.frame = row.frame;
    det.box = row.box;
    det.confidence = row.conf;
    bundle.add_detection(std::move(det));
  }
  return bundle;
}

void write_mot_detections(const std::string& path,
                          const SequenceBundle& bundle) {
  auto out = open_out(path);
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    for (const Detection& det : bundle.detections_in(frame)) {
      out << frame << ",-1," << box_fields(det.box) << ","
          << fmt(det.confidence) << ",-1,-1,-1\n";
    }
  }
}

std::vector<GtRecord> read_mot_gt(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<GtRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = split_fields(lines[i]);
    require_fields(fields, 9, path, line_no);
    GtRecord rec;
    rec.frame = parse_int(fields[0], path, line_no);
    rec.identity = parse_int(fields[1], path, line_no);
    if (rec.frame < 1) fail_at(path, line_no, "frame must be >= 1");
    rec.box = parse_box(fields, 2, path, line_no);
    parse_int(fields[6], path, line_no);  // considered flag
    parse_int(fields[7], path, line_no);  // class
    rec.visibility = parse_double(fields[8], path, line_no);
    records.push_back(rec);
  }
  return records;
}

void write_mot_gt(const std::string& path, const std::vector<GtRecord>& gt) {
  auto out = open_out(path);
  for (const GtRecord& rec : gt) {
    out << rec.frame << "," << rec.identity << "," << box_fields(rec.box)
        << ",1,1," << fmt(rec.visibility) << "\n";
  }
}

std::vector<Trajectory> read_mot_trajectories(const std::string& path) {
  const auto lines = read_lines(path);
  std::map<int, std::vector<Detection>> by_id;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = split_fields(lines[i]);
    require_fields(fields, 10, path, line_no);
    Detection det;
    det.frame = parse_int(fields[0], path, line_no);
    const int id = parse_int(fields[1], path, line_no);
    if (det.frame < 1) fail_at(path, line_no, "frame must be >= 1");
    if (id < 0) fail_at(path, line_no, "trajectory rows need an id >= 0");
    det.box = parse_box(fields, 2, path, line_no);
    det.confidence = parse_double(fields[6], path, line_no);
    det.det_index = -1;  // unknown for boxes loaded without their detection file
    by_id[id].push_back(det);
  }
  std::vector<Trajectory> trajectories;
  for (auto& [id, dets] : by_id) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.frame < b.frame;
                     });
    for (std::size_t k = 1; k < dets.size(); ++k) {
      if (dets[k].frame == dets[k - 1].frame) {
        std::ostringstream os;
        os << path << ": trajectory " << id << " has two boxes in frame "
           << dets[k].frame;
        throw std::runtime_error(os.str());
      }
    }
    trajectories.emplace_back(id, std::move(dets));
  }
  return trajectories;
}

void write_mot_trajectories(const std::string& path,
                            const std::vector<Trajectory>& trajectories) {
  std::vector<const Trajectory*> order;
  order.reserve(trajectories.size());
  for (const Trajectory& t : trajectories) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Trajectory* a, const Trajectory* b) {
                     return a->id() < b->id();
                   });
  auto out = open_out(path);
  for (const Trajectory* t : order) {
    for (const Detection& det : t->detections()) {
      out << det.frame << "," << t->id() << "," << box_fields(det.box) << ","
          << fmt(det.confidence) << ",-1,-1,-1\n";
    }
  }
}

void read_embeddings(const std::string& path, SequenceBundle& bundle) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0].empty())
    throw std::runtime_error(path + ":1: missing embedding header");
  const auto header = split_fields(lines[0]);
  if (header.size() < 3 || header[0] != "frame" || header[1] != "det_index")
    fail_at(path, 1, "header must start with frame,det_index,f0,...");
  const int dim = static_cast<int>(header.size()) - 2;
  for (int d = 0; d < dim; ++d) {
    if (header[static_cast<std::size_t>(d) + 2] != "f" + std::to_string(d))
      fail_at(path, 1, "feature columns must be named f0..f" +
                           std::to_string(dim - 1));
  }
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = split_fields(lines[i]);
    require_fields(fields, static_cast<std::size_t>(dim) + 2, path, line_no);
    const int frame = parse_int(fields[0], path, line_no);
    const int det_index = parse_int(fields[1], path, line_no);
    if (frame < 1 || frame > bundle.frame_count)
      fail_at(path, line_no,
              "frame " + std::to_string(frame) + " outside the sequence");
    auto& dets = bundle.frames[static_cast<std::size_t>(frame) - 1];
    if (det_index < 0 || det_index >= static_cast<int>(dets.size())) {
      std::ostringstream os;
      os << "no detection (frame " << frame << ", det_index " << det_index
         << ")";
      fail_at(path, line_no, os.str());
    }
    if (!seen.insert({frame, det_index}).second) {
      std::ostringstream os;
      os << "duplicate row for (frame " << frame << ", det_index " << det_index
         << ")";
      fail_at(path, line_no, os.str());
    }
    std::vector<double> values(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d)
      values[static_cast<std::size_t>(d)] =
          parse_double(fields[static_cast<std::size_t>(d) + 2], path, line_no);
    dets[static_cast<std::size_t>(det_index)].embedding = std::move(values);
  }
}

void write_embeddings(const std::string& path, const SequenceBundle& bundle) {
  const int dim = bundle.embedding_dim();
  if (dim == 0)
    throw std::runtime_error(
        "write_embeddings: no detection carries an embedding");
  auto out = open_out(path);
  out << "frame,det_index";
  for (int d = 0; d < dim; ++d) out << ",f" << d;
  out << "\n";
  for (int frame = 1; frame <= bundle.frame_count; ++frame) {
    for (const Detection& det : bundle.detections_in(frame)) {
      if (!det.embedding) continue;
      if (static_cast<int>(det.embedding->size()) != dim) {
        std::ostringstream os;
        os << "write_embeddings: detection (frame " << frame << ", det_index "
           << det.det_index << ") has dimension " << det.embedding->size()
           << ", expected " << dim;
        throw std::runtime_error(os.str());
      }
      out << frame << "," << det.det_index;
      for (double v : *det.embedding) out << "," << fmt(v);
      out << "\n";
    }
  }
}

namespace {

void check_synth(const SynthConfig& cfg) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("generate: ") + what);
  };
  need(cfg.num_identities >= 1, "num_identities must be >= 1");
  need(cfg.frame_count >= 1, "frame_count must be >= 1");
  need(cfg.fps > 0.0, "fps must be positive");
  need(cfg.min_box_w > 0.0 && cfg.min_box_w <= cfg.max_box_w,
       "box width range is empty");
  need(cfg.aspect_min > 0.0 && cfg.aspect_min <= cfg.aspect_max,
       "aspect range is empty");
  need(cfg.image_width > cfg.max_box_w &&
           cfg.image_height > cfg.max_box_w * cfg.aspect_max,
       "image too small for the largest box");
  need(cfg.min_speed >= 0.0 && cfg.min_speed <= cfg.max_speed,
       "speed range is empty");
  need(cfg.accel_noise_std >= 0.0, "accel_noise_std must be >= 0");
  need(cfg.det_noise_std >= 0.0, "det_noise_std must be >= 0");
  need(cfg.emb_noise_std >= 0.0, "emb_noise_std must be >= 0");
  need(cfg.miss_prob >= 0.0 && cfg.miss_prob <= 1.0,
       "miss_prob must be in [0, 1]");
  need(cfg.fp_rate >= 0.0, "fp_rate must be >= 0");
  need(cfg.occlusion_count >= 0, "occlusion_count must be >= 0");
  need(cfg.occlusion_min_len >= 1 &&
           cfg.occlusion_min_len <= cfg.occlusion_max_len,
       "occlusion duration range is empty");
  need(cfg.d_app >= 1, "d_app must be >= 1");
  need(cfg.det_conf_min >= 0.0 && cfg.det_conf_min <= cfg.det_conf_max &&
           cfg.det_conf_max <= 1.0,
       "detection confidence range is empty");
  need(cfg.fp_conf_min >= 0.0 && cfg.fp_conf_min <= cfg.fp_conf_max &&
           cfg.fp_conf_max <= 1.0,
       "false-positive confidence range is empty");
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  for (double& x : v) {
    x = rng.normal();
    norm_sq += x * x;
  }
  if (norm_sq < 1e-24) {
    v[0] = 1.0;
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

// Keeps lo <= x <= hi by mirroring, flipping the velocity on each bounce.
void reflect(double& x, double& v, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x < lo) {
      x = 2.0 * lo - x;
      v = -v;
    } else {
      x = 2.0 * hi - x;
      v = -v;
    }
  }
}

}  // namespace

SequenceBundle generate(const SynthConfig& cfg) {
  check_synth(cfg);
  Rng rng(cfg.seed);
  const int n = cfg.num_identities;
  const int t_max = cfg.frame_count;

  struct Actor {
    double cx, cy, vx, vy, w, h;
    std::vector<double> embedding;
  };
  std::vector<Actor> actors;
  actors.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Actor a;
    a.w = rng.uniform(cfg.min_box_w, cfg.max_box_w);
    a.h = a.w * rng.uniform(cfg.aspect_min, cfg.aspect_max);
    a.cx = rng.uniform(0.5 * a.w, cfg.image_width - 0.5 * a.w);
    a.cy = rng.uniform(0.5 * a.h, cfg.image_height - 0.5 * a.h);
    const double speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    a.vx = speed * std::cos(angle);
    a.vy = speed * std::sin(angle);
    a.embedding = random_unit(rng, cfg.d_app);
    actors.push_back(std::move(a));
  }

  // Noisy constant-velocity paths, one box per identity per frame.
  std::vector<std::vector<BBox>> track(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Actor& a = actors[static_cast<std::size_t>(i)];
    auto& boxes = track[static_cast<std::size_t>(i)];
    boxes.reserve(static_cast<std::size_t>(t_max));
    for (int t = 1; t <= t_max; ++t) {
      boxes.push_back(BBox{a.cx - 0.5 * a.w, a.cy - 0.5 * a.h, a.w, a.h});
      a.vx += rng.normal(0.0, cfg.accel_noise_std);
      a.vy += rng.normal(0.0, cfg.accel_noise_std);
      a.cx += a.vx;
      a.cy += a.vy;
      reflect(a.cx, a.vx, 0.5 * a.w, cfg.image_width - 0.5 * a.w);
      reflect(a.cy, a.vy, 0.5 * a.h, cfg.image_height - 0.5 * a.h);
    }
  }

  // Occlusion events blank out detections of one identity for a stretch.
  std::vector<std::vector<char>> occluded(
      static_cast<std::size_t>(n),
      std::vector<char>(static_cast<std::size_t>(t_max) + 1, 0));
  for (int e = 0; e < cfg.occlusion_count; ++e) {
    const int who = rng.uniform_int(0, n - 1);
    const int len = rng.uniform_int(cfg.occlusion_min_len, cfg.occlusion_max_len);
    const int start = rng.uniform_int(1, std::max(1, t_max - len + 1));
    for (int t = start; t <= std::min(t_max, start + len - 1); ++t)
      occluded[static_cast<std::size_t>(who)][static_cast<std::size_t>(t)] = 1;
  }

  SequenceBundle bundle;
  bundle.name = "synth-" + std::to_string(cfg.seed);
  bundle.fps = cfg.fps;
  bundle.frame_count = t_max;
  bundle.frames.resize(static_cast<std::size_t>(t_max));
  std::vector<GtRecord> gt;
  gt.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(t_max));

  for (int t = 1; t <= t_max; ++t) {
    for (int i = 0; i < n; ++i) {
      const BBox& box =
          track[static_cast<std::size_t>(i)][static_cast<std::size_t>(t) - 1];
      const bool occ =
          occluded[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] != 0;
      gt.push_back(GtRecord{t, i + 1, box, occ ? 0.0 : 1.0});
      if (occ) continue;
      if (rng.uniform01() < cfg.miss_prob) continue;
      Detection det;
      det.frame = t;
      det.box.x = box.x + rng.normal(0.0, cfg.det_noise_std);
      det.box.y = box.y + rng.normal(0.0, cfg.det_noise_std);
      det.box.w = std::max(1.0, box.w + rng.normal(0.0, cfg.det_noise_std));
      det.box.h = std::max(1.0, box.h + rng.normal(0.0, cfg.det_noise_std));
      det.confidence = rng.uniform(cfg.det_conf_min, cfg.det_conf_max);
      std::vector<double> emb = actors[static_cast<std::size_t>(i)].embedding;
      double norm_sq = 0.0;
      for (double& x : emb) {
        x += rng.normal(0.0, cfg.emb_noise_std);
        norm_sq += x * x;
      }
      if (norm_sq >= 1e-24) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (double& x : emb) x *= inv;
      }
      det.embedding = std::move(emb);
      bundle.add_detection(std::move(det));
    }
    const int fp_count = cfg.fp_rate > 0.0 ? rng.poisson(cfg.fp_rate) : 0;
    for (int k = 0; k < fp_count; ++k) {
      Detection det;
      det.frame = t;
      const double w = rng.uniform(cfg.min_box_w, cfg.max_box_w);
      const double h = w * rng.uniform(cfg.aspect_min, cfg.aspect_max);
      det.box.x = rng.uniform(0.0, cfg.image_width - w);
      det.box.y = rng.uniform(0.0, cfg.image_height - h);
      det.box.w = w;
      det.box.h = h;
      det.confidence = rng.uniform(cfg.fp_conf_min, cfg.fp_conf_max);
      det.embedding = random_unit(rng, cfg.d_app);
      bundle.add_detection(std::move(det));
    }
  }
  bundle.ground_truth = std::move(gt);
  return bundle;
}

std::vector<AugmentSample> augment(
    const SequenceBundle& bundle,
    const std::vector<std::pair<double, std::vector<Tracklet>>>&
        tracklets_per_th_c,
    const AugmentConfig& cfg, std::uint64_t seed) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("augment: ") + what);
  };
  need(cfg.stride >= 1, "stride must be >= 1");
  need(cfg.jitter >= 0, "jitter must be >= 0");
  need(cfg.min_fraction > 0.0 && cfg.min_fraction <= cfg.max_fraction &&
           cfg.max_fraction <= 1.0,
       "clip fraction range must satisfy 0 < min <= max <= 1");
  need(cfg.min_clip_frames >= 1, "min_clip_frames must be >= 1");
  need(bundle.frame_count >= 1, "bundle has no frames");

  const int t_max = bundle.frame_count;
  Rng rng(Rng::mix(seed, 0xA06));
  struct Window {
    int start, end;
  };
  std::vector<Window> windows;
  for (int anchor = cfg.stride; anchor <= t_max; anchor += cfg.stride) {
    const int shifted = anchor + rng.uniform_int(-cfg.jitter, cfg.jitter);
    const double fraction = rng.uniform(cfg.min_fraction, cfg.max_fraction);
    const int length = std::max(
        1, static_cast<int>(std::lround(fraction * static_cast<double>(t_max))));
    const int start = std::clamp(shifted, 1, t_max);
    const int end = std::min(t_max, start + length - 1);
    if (end - start + 1 < cfg.min_clip_frames) continue;
    windows.push_back(Window{start, end});
  }

  std::vector<AugmentSample> samples;
  for (const Window& win : windows) {
    for (const auto& [th_c, tracklets] : tracklets_per_th_c) {
      AugmentSample sample;
      sample.clip_start = win.start;
      sample.clip_end = win.end;
      sample.th_c = th_c;
      for (const Tracklet& t : tracklets) {
        std::vector<Detection> kept;
        for (const Detection& det : t.detections())
          if (det.frame >= win.start && det.frame <= win.end)
            kept.push_back(det);
        if (!kept.empty()) sample.tracklets.emplace_back(t.id(), std::move(kept));
      }
      if (!sample.tracklets.empty()) samples.push_back(std::move(sample));
    }
  }
  return samples;
}

}  // namespace mot
