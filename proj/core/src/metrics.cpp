#include "mot/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mot/assignment.hpp"
#include "mot/geometry.hpp"
#include "mot/gtmatch.hpp"

namespace mot {

namespace {

struct FrameEntry {
  int who;  // identity index (gt) or trajectory index (pred)
  const BBox* box;
};

// Per-frame presence lists; frame 0 unused.
struct FrameIndex {
  std::vector<std::vector<FrameEntry>> frames;
  int max_frame = 0;
};

FrameIndex index_gt(const std::vector<GtRecord>& gt,
                    const std::vector<int>& identity_index, int max_frame) {
  FrameIndex fi;
  fi.max_frame = max_frame;
  fi.frames.resize(static_cast<std::size_t>(max_frame) + 1);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    fi.frames[static_cast<std::size_t>(gt[i].frame)].push_back(
        {identity_index[i], &gt[i].box});
  }
  return fi;
}

FrameIndex index_preds(const std::vector<Trajectory>& preds, int max_frame) {
  FrameIndex fi;
  fi.max_frame = max_frame;
  fi.frames.resize(static_cast<std::size_t>(max_frame) + 1);
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (const Detection& d : preds[p].detections()) {
      fi.frames[static_cast<std::size_t>(d.frame)].push_back(
          {static_cast<int>(p), &d.box});
    }
  }
  return fi;
}

int max_frame_of(const std::vector<GtRecord>& gt,
                 const std::vector<Trajectory>& preds) {
  int m = 0;
  for (const GtRecord& r : gt) m = std::max(m, r.frame);
  for (const Trajectory& t : preds) m = std::max(m, t.end());
  return m;
}

}  // namespace

Idf1Result idf1(const std::vector<GtRecord>& gt,
                const std::vector<Trajectory>& preds, double iou_gate) {
  // Dense identity indices, ordered by identity number for determinism.
  std::map<int, int> gid;
  for (const GtRecord& r : gt) gid.emplace(r.identity, 0);
  {
    int next = 0;
    for (auto& [id, idx] : gid) idx = next++;
  }
  std::vector<int> identity_index(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    identity_index[i] = gid.at(gt[i].identity);
  }
  const int ng = static_cast<int>(gid.size());
  const int np = static_cast<int>(preds.size());

  Idf1Result out;
  long total_gt = static_cast<long>(gt.size());
  long total_pred = 0;
  for (const Trajectory& t : preds) total_pred += static_cast<long>(t.size());
  if (ng == 0 && np == 0) {
    out.idf1 = 1.0;
    return out;
  }

  std::vector<long> len_gt(static_cast<std::size_t>(ng), 0);
  for (const int gi : identity_index) len_gt[static_cast<std::size_t>(gi)] += 1;
  std::vector<long> len_pred(static_cast<std::size_t>(np), 0);
  for (int p = 0; p < np; ++p) {
    len_pred[static_cast<std::size_t>(p)] =
        static_cast<long>(preds[static_cast<std::size_t>(p)].size());
  }

  // Frame-wise co-presence with sufficient overlap, per identity pair.
  std::vector<long> m(static_cast<std::size_t>(ng) * std::max(np, 1), 0);
  {
    const int mf = max_frame_of(gt, preds);
    const FrameIndex gt_fi = index_gt(gt, identity_index, mf);
    const FrameIndex pr_fi = index_preds(preds, mf);
    for (int f = 1; f <= mf; ++f) {
      for (const FrameEntry& ge : gt_fi.frames[static_cast<std::size_t>(f)]) {
        for (const FrameEntry& pe :
             pr_fi.frames[static_cast<std::size_t>(f)]) {
          if (iou(*ge.box, *pe.box) >= iou_gate) {
            m[static_cast<std::size_t>(ge.who) * np + pe.who] += 1;
          }
        }
      }
    }
  }

  long idtp = 0;
  if (ng > 0 && np > 0) {
    // Square assignment over real and dummy identities: pairing a real pair
    // costs its disagreements, leaving an identity unmatched costs its whole
    // length, and dummy-dummy pairings are free.
    const int n = ng + np;
    CostMatrix costs(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (int g = 0; g < ng; ++g) {
      for (int p = 0; p < np; ++p) {
        const long mm = m[static_cast<std::size_t>(g) * np + p];
        costs.at(static_cast<std::size_t>(g), static_cast<std::size_t>(p)) =
            static_cast<double>(len_gt[static_cast<std::size_t>(g)] +
                                len_pred[static_cast<std::size_t>(p)] -
                                2 * mm);
      }
      costs.at(static_cast<std::size_t>(g),
               static_cast<std::size_t>(np + g)) =
          static_cast<double>(len_gt[static_cast<std::size_t>(g)]);
    }
    for (int p = 0; p < np; ++p) {
      costs.at(static_cast<std::size_t>(ng + p), static_cast<std::size_t>(p)) =
          static_cast<double>(len_pred[static_cast<std::size_t>(p)]);
      for (int g = 0; g < ng; ++g) {
        costs.at(static_cast<std::size_t>(ng + p),
                 static_cast<std::size_t>(np + g)) = 0.0;
      }
    }
    for (const auto& [r, c] : solve_assignment(costs).matches) {
      if (r < ng && c < np) {
        idtp += m[static_cast<std::size_t>(r) * np + c];
      }
    }
  }

  out.idtp = idtp;
  out.idfn = total_gt - idtp;
  out.idfp = total_pred - idtp;
  const long denom = 2 * idtp + out.idfp + out.idfn;
  out.idf1 = denom > 0 ? 2.0 * static_cast<double>(idtp) /
                             static_cast<double>(denom)
                       : 1.0;
  return out;
}

int id_switches(const std::vector<GtRecord>& gt,
                const std::vector<Trajectory>& preds, double iou_gate) {
  const int mf = max_frame_of(gt, preds);
  std::vector<int> identity_index(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    identity_index[i] = gt[i].identity;  // keep raw ids; only used as keys
  }
  const FrameIndex gt_fi = index_gt(gt, identity_index, mf);
  const FrameIndex pr_fi = index_preds(preds, mf);

  std::map<int, int> last;  // gt identity -> last matched trajectory index
  int switches = 0;
  for (int f = 1; f <= mf; ++f) {
    const auto& gs = gt_fi.frames[static_cast<std::size_t>(f)];
    const auto& ps = pr_fi.frames[static_cast<std::size_t>(f)];
    if (gs.empty() || ps.empty()) continue;
    CostMatrix costs(gs.size(), ps.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const auto it = last.find(gs[i].who);
      for (std::size_t j = 0; j < ps.size(); ++j) {
        const double overlap = iou(*gs[i].box, *ps[j].box);
        if (overlap < iou_gate) continue;
        double c = 1.0 - overlap;
        // Surcharge pairings that would break an existing correspondence.
        if (it != last.end() && it->second != ps[j].who) c += 0.01;
        costs.at(i, j) = c;
      }
    }
    for (const auto& [i, j] : solve_assignment(costs).matches) {
      const int g = gs[static_cast<std::size_t>(i)].who;
      const int p = ps[static_cast<std::size_t>(j)].who;
      const auto it = last.find(g);
      if (it != last.end() && it->second != p) switches += 1;
      last[g] = p;
    }
  }
  return switches;
}

HprResult hpr(const std::vector<Tracklet>& tracklets,
              const std::vector<std::vector<int>>& attribution) {
  if (tracklets.empty()) {
    throw std::invalid_argument("hpr: no tracklets to score");
  }
  HprResult out;
  int high = 0;
  for (const Tracklet& t : tracklets) {
    std::map<int, int> votes;
    for (const Detection& d : t.detections()) {
      int id = kBackground;
      if (d.frame >= 0 && d.frame < static_cast<int>(attribution.size()) &&
          d.det_index >= 0 &&
          d.det_index <
              static_cast<int>(attribution[static_cast<std::size_t>(d.frame)]
                                   .size())) {
        id = attribution[static_cast<std::size_t>(d.frame)]
                        [static_cast<std::size_t>(d.det_index)];
      }
      votes[id] += 1;
    }
    const int modal = majority_vote(votes);
    const double share =
        static_cast<double>(votes.at(modal)) / static_cast<double>(t.size());
    out.purity.push_back(share);
    if (modal != kBackground && share > 0.8) high += 1;
  }
  out.rate = static_cast<double>(high) / static_cast<double>(tracklets.size());
  return out;
}

HprResult hpr(const std::vector<Tracklet>& tracklets,
              const std::vector<GtRecord>& gt, double iou_gate) {
  if (tracklets.empty()) {
    throw std::invalid_argument("hpr: no tracklets to score");
  }
  // Rebuild a detection bundle from the tracklets so the per-frame optimal
  // attribution is identical to the pipeline-internal one.
  int mf = 0;
  for (const Tracklet& t : tracklets) mf = std::max(mf, t.end());
  for (const GtRecord& r : gt) mf = std::max(mf, r.frame);
  SequenceBundle bundle;
  bundle.name = "hpr";
  bundle.frame_count = mf;
  bundle.frames.resize(static_cast<std::size_t>(mf));
  // (tracklet index, position) of every rebuilt detection, per frame.
  std::vector<Tracklet> reindexed;
  reindexed.reserve(tracklets.size());
  for (std::size_t ti = 0; ti < tracklets.size(); ++ti) {
    std::vector<Detection> dets = tracklets[ti].detections();
    for (Detection& d : dets) {
      Detection copy = d;
      const int slot = bundle.add_detection(copy);
      d.det_index = slot;
    }
    reindexed.emplace_back(tracklets[ti].id(), std::move(dets));
  }
  bundle.ground_truth = gt;
  return hpr(reindexed, attribute_detections(bundle, iou_gate));
}

EvalReport evaluate(const std::vector<GtRecord>& gt,
                    const std::vector<Trajectory>& preds, double iou_gate) {
  EvalReport r;
  const Idf1Result f1 = idf1(gt, preds, iou_gate);
  r.idf1 = f1.idf1;
  r.idtp = f1.idtp;
  r.idfp = f1.idfp;
  r.idfn = f1.idfn;
  r.id_switches = id_switches(gt, preds, iou_gate);
  r.tracklet_count = static_cast<int>(preds.size());
  r.hpr = preds.empty() ? 0.0 : hpr(preds, gt, iou_gate).rate;
  return r;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["idf1"] = report.idf1;
  j["id_switches"] = report.id_switches;
  j["hpr"] = report.hpr;
  j["tracklet_count"] = report.tracklet_count;
  j["idtp"] = report.idtp;
  j["idfp"] = report.idfp;
  j["idfn"] = report.idfn;
  return j.dump() + "\n";
}

std::string report_to_table(const EvalReport& report) {
  char buf[64];
  std::ostringstream os;
  const auto row = [&os, &buf](const char* name, const char* fmt, auto value) {
    std::snprintf(buf, sizeof(buf), fmt, value);
    os << name;
    for (std::size_t i = std::string(name).size(); i < 16; ++i) os << ' ';
    os << buf << '\n';
  };
  row("idf1", "%.4f", report.idf1);
  row("id_switches", "%d", report.id_switches);
  row("hpr", "%.4f", report.hpr);
  row("tracklet_count", "%d", report.tracklet_count);
  row("idtp", "%ld", report.idtp);
  row("idfp", "%ld", report.idfp);
  row("idfn", "%ld", report.idfn);
  return os.str();
}

}  // namespace mot
