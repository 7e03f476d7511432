#include "mot/model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mot/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as native little-endian doubles");

namespace mot {

namespace {

using nlohmann::json;

Eigen::MatrixXd xavier(int rows, int cols, double gain, Rng& rng) {
  const double limit = gain * std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
  }
  return m;
}

MlpParams init_mlp(int in, int hidden, int out, double gain, Rng& rng) {
  MlpParams p;
  p.w1 = xavier(in, hidden, gain, rng);
  p.b1 = Eigen::MatrixXd::Zero(1, hidden);
  p.w2 = xavier(hidden, out, gain, rng);
  p.b2 = Eigen::MatrixXd::Zero(1, out);
  return p;
}

ParamTensors::Mlp insert_mlp(ad::Tape& tape, const MlpParams& p, bool rg) {
  return {tape.leaf(p.w1, rg), tape.leaf(p.b1, rg), tape.leaf(p.w2, rg),
          tape.leaf(p.b2, rg)};
}

ad::Tensor apply_mlp(const ParamTensors::Mlp& m, ad::Tensor x) {
  ad::Tensor h = ad::relu(ad::add_row_broadcast(ad::matmul(x, m.w1), m.b1));
  return ad::add_row_broadcast(ad::matmul(h, m.w2), m.b2);
}

template <typename Params, typename Out>
std::vector<std::pair<std::string, Out>> enumerate_tensors(Params& p) {
  std::vector<std::pair<std::string, Out>> out;
  const auto mlp = [&out](const char* name, auto& m) {
    out.emplace_back(std::string(name) + ".w1", &m.w1);
    out.emplace_back(std::string(name) + ".b1", &m.b1);
    out.emplace_back(std::string(name) + ".w2", &m.w2);
    out.emplace_back(std::string(name) + ".b2", &m.b2);
  };
  mlp("node_enc", p.node_enc);
  mlp("edge_enc", p.edge_enc);
  mlp("edge_update", p.edge_update);
  mlp("node_update", p.node_update);
  mlp("classifier", p.classifier);
  for (std::size_t i = 0; i < p.adapters.size(); ++i) {
    out.emplace_back("adapter." + std::to_string(i), &p.adapters[i]);
  }
  return out;
}

}  // namespace

ModelParams ModelParams::init(const MpnnConfig& cfg, std::uint64_t seed) {
  if (cfg.l_mp < 0 || cfg.hl < 1 || cfg.d_app < 1) {
    throw std::invalid_argument(
        "model init: l_mp must be >= 0, hl and d_app >= 1");
  }
  Rng rng(seed);
  ModelParams p;
  const double g = cfg.init_gain;
  p.node_enc = init_mlp(cfg.d_app, cfg.node_hidden, cfg.node_dim, g, rng);
  p.edge_enc = init_mlp(8, cfg.edge_hidden, cfg.edge_dim, g, rng);
  p.edge_update = init_mlp(2 * cfg.node_dim + cfg.edge_dim,
                           cfg.edge_update_hidden, cfg.edge_dim, g, rng);
  p.node_update = init_mlp(cfg.node_dim + cfg.edge_dim, cfg.node_update_hidden,
                           cfg.node_dim, g, rng);
  p.classifier = init_mlp(cfg.edge_dim, cfg.classifier_hidden, 1, g, rng);
  p.adapters.assign(cfg.hl, Eigen::MatrixXd::Zero(1, cfg.edge_dim));
  return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>>
ModelParams::named_tensors() {
  return enumerate_tensors<ModelParams, Eigen::MatrixXd*>(*this);
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>>
ModelParams::named_tensors() const {
  return enumerate_tensors<const ModelParams, const Eigen::MatrixXd*>(*this);
}

ParamTensors insert_params(ad::Tape& tape, const ModelParams& params,
                           bool requires_grad) {
  ParamTensors pt;
  pt.node_enc = insert_mlp(tape, params.node_enc, requires_grad);
  pt.edge_enc = insert_mlp(tape, params.edge_enc, requires_grad);
  pt.edge_update = insert_mlp(tape, params.edge_update, requires_grad);
  pt.node_update = insert_mlp(tape, params.node_update, requires_grad);
  pt.classifier = insert_mlp(tape, params.classifier, requires_grad);
  for (const Eigen::MatrixXd& a : params.adapters) {
    pt.adapters.push_back(tape.leaf(a, requires_grad));
  }
  return pt;
}

std::vector<int> canonical_edge_order(const TrackletGraph& graph) {
  std::vector<int> order(graph.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&graph](int a, int b) {
    const GraphEdge& ea = graph.edges[static_cast<std::size_t>(a)];
    const GraphEdge& eb = graph.edges[static_cast<std::size_t>(b)];
    const int sa = graph.nodes[static_cast<std::size_t>(ea.src)].id();
    const int sb = graph.nodes[static_cast<std::size_t>(eb.src)].id();
    if (sa != sb) return sa < sb;
    return graph.nodes[static_cast<std::size_t>(ea.dst)].id() <
           graph.nodes[static_cast<std::size_t>(eb.dst)].id();
  });
  return order;
}

std::pair<ad::Tensor, ad::Tensor> init_features(ad::Tape& tape,
                                                const TrackletGraph& graph,
                                                const ParamTensors& pt,
                                                const MpnnConfig& cfg,
                                                int level,
                                                const std::vector<int>& order) {
  if (level < 0 || level >= static_cast<int>(pt.adapters.size())) {
    std::ostringstream os;
    os << "init_features: level " << level << " outside [0, "
       << pt.adapters.size() << ")";
    throw std::invalid_argument(os.str());
  }
  if (graph.node_inputs.size() != graph.nodes.size() ||
      graph.raw_edge_features.size() != graph.edges.size()) {
    throw std::invalid_argument(
        "init_features: graph is missing node inputs or raw edge features");
  }
  const int v = static_cast<int>(graph.nodes.size());
  const int d = static_cast<int>(graph.node_inputs.front().size());
  if (d != cfg.d_app) {
    std::ostringstream os;
    os << "init_features: node inputs have width " << d
       << " but the model expects " << cfg.d_app;
    throw std::invalid_argument(os.str());
  }
  Eigen::MatrixXd node_in(v, d);
  for (int i = 0; i < v; ++i) {
    for (int k = 0; k < d; ++k) {
      node_in(i, k) = graph.node_inputs[static_cast<std::size_t>(i)]
                                       [static_cast<std::size_t>(k)];
    }
  }
  const int e = static_cast<int>(order.size());
  Eigen::MatrixXd edge_in(e, 8);
  for (int r = 0; r < e; ++r) {
    const auto& feat =
        graph.raw_edge_features[static_cast<std::size_t>(order[r])];
    for (int k = 0; k < 8; ++k) edge_in(r, k) = feat[static_cast<std::size_t>(k)];
  }

  ad::Tensor f_nodes = apply_mlp(pt.node_enc, tape.leaf(node_in));
  ad::Tensor f_edges = e > 0
                           ? ad::add_row_broadcast(
                                 apply_mlp(pt.edge_enc, tape.leaf(edge_in)),
                                 pt.adapters[static_cast<std::size_t>(level)])
                           : tape.leaf(Eigen::MatrixXd(0, cfg.edge_dim));
  return {f_nodes, f_edges};
}

std::pair<ad::Tensor, ad::Tensor> message_pass(ad::Tape& tape,
                                               const TrackletGraph& graph,
                                               ad::Tensor f_nodes,
                                               ad::Tensor f_edges,
                                               const ParamTensors& pt,
                                               const MpnnConfig& cfg,
                                               const std::vector<int>& order) {
  const int v = static_cast<int>(graph.nodes.size());
  const int e = static_cast<int>(order.size());
  if (e == 0 || cfg.l_mp == 0) return {f_nodes, f_edges};

  std::vector<int> src(e), dst(e);
  for (int r = 0; r < e; ++r) {
    src[r] = graph.edges[static_cast<std::size_t>(order[r])].src;
    dst[r] = graph.edges[static_cast<std::size_t>(order[r])].dst;
  }
  // Message r goes to receivers[r]; rows 0..e-1 feed the earlier endpoints,
  // rows e..2e-1 the later ones.
  std::vector<int> receivers(src);
  receivers.insert(receivers.end(), dst.begin(), dst.end());
  std::vector<int> self = cfg.message_uses_neighbor ? dst : src;
  {
    const std::vector<int>& second = cfg.message_uses_neighbor ? src : dst;
    self.insert(self.end(), second.begin(), second.end());
  }
  std::vector<int> edge_dup(2 * static_cast<std::size_t>(e));
  for (int r = 0; r < e; ++r) {
    edge_dup[static_cast<std::size_t>(r)] = r;
    edge_dup[static_cast<std::size_t>(r) + e] = r;
  }

  Eigen::MatrixXd iso = Eigen::MatrixXd::Zero(v, cfg.node_dim);
  {
    std::vector<char> touched(static_cast<std::size_t>(v), 0);
    for (const int i : receivers) touched[static_cast<std::size_t>(i)] = 1;
    for (int i = 0; i < v; ++i) {
      if (!touched[static_cast<std::size_t>(i)]) iso.row(i).setOnes();
    }
  }
  ad::Tensor iso_mask = tape.leaf(iso);

  for (int l = 0; l < cfg.l_mp; ++l) {
    ad::Tensor h_src = ad::gather_rows(f_nodes, src);
    ad::Tensor h_dst = ad::gather_rows(f_nodes, dst);
    ad::Tensor new_edges =
        apply_mlp(pt.edge_update, ad::concat_cols({h_src, h_dst, f_edges}));

    ad::Tensor h_self = ad::gather_rows(f_nodes, self);
    ad::Tensor e_both = ad::gather_rows(new_edges, edge_dup);
    ad::Tensor messages =
        apply_mlp(pt.node_update, ad::concat_cols({h_self, e_both}));
    ad::Tensor summed = ad::segment_sum(messages, receivers, v);
    // Isolated nodes have a zero sum; give them their previous feature.
    f_nodes = ad::add(summed, ad::mul(iso_mask, f_nodes));
    f_edges = new_edges;
  }
  return {f_nodes, f_edges};
}

ad::Tensor classify_edges(ad::Tensor f_edges, const ParamTensors& pt) {
  return ad::sigmoid(apply_mlp(pt.classifier, f_edges));
}

std::vector<double> score_edges(const TrackletGraph& graph,
                                const ModelParams& params,
                                const MpnnConfig& cfg, int level) {
  std::vector<double> out(graph.edges.size(), 0.0);
  if (graph.edges.empty()) return out;
  ad::Tape tape;
  const ParamTensors pt = insert_params(tape, params, false);
  const std::vector<int> order = canonical_edge_order(graph);
  auto [f_nodes, f_edges] = init_features(tape, graph, pt, cfg, level, order);
  auto [fn, fe] = message_pass(tape, graph, f_nodes, f_edges, pt, cfg, order);
  const ad::Tensor scores = classify_edges(fe, pt);
  const Eigen::MatrixXd& s = tape.value(scores);
  for (std::size_t r = 0; r < order.size(); ++r) {
    out[static_cast<std::size_t>(order[r])] = s(static_cast<int>(r), 0);
  }
  return out;
}

TrainResult train(const std::vector<TrainSample>& data, ModelParams params,
                  const MpnnConfig& cfg, const TrainConfig& tcfg) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  for (std::size_t s = 0; s < data.size(); ++s) {
    if (data[s].levels.empty() ||
        static_cast<int>(data[s].levels.size()) > cfg.hl) {
      std::ostringstream os;
      os << "train: sample " << s << " has " << data[s].levels.size()
         << " level graphs for a " << cfg.hl << "-level model";
      throw std::invalid_argument(os.str());
    }
    for (std::size_t l = 0; l < data[s].levels.size(); ++l) {
      const TrackletGraph& g = data[s].levels[l];
      if (!g.labels) {
        std::ostringstream os;
        os << "train: sample " << s << " level " << l << " graph is unlabeled";
        throw std::invalid_argument(os.str());
      }
      if (g.labels->size() != g.edges.size()) {
        std::ostringstream os;
        os << "train: sample " << s << " level " << l << " has "
           << g.labels->size() << " labels for " << g.edges.size() << " edges";
        throw std::invalid_argument(os.str());
      }
    }
  }

  std::vector<Eigen::MatrixXd*> plist;
  for (auto& [name, tensor] : params.named_tensors()) plist.push_back(tensor);
  ad::AdamState adam(plist, tcfg.adam);

  // Canonical orders and label columns never change; compute them once.
  struct LevelStatic {
    std::vector<int> order;
    Eigen::MatrixXd labels;  // in canonical order
  };
  std::vector<std::vector<LevelStatic>> statics(data.size());
  for (std::size_t s = 0; s < data.size(); ++s) {
    for (const TrackletGraph& g : data[s].levels) {
      LevelStatic ls;
      ls.order = canonical_edge_order(g);
      ls.labels.resize(static_cast<int>(g.edges.size()), 1);
      for (std::size_t r = 0; r < ls.order.size(); ++r) {
        ls.labels(static_cast<int>(r), 0) =
            (*g.labels)[static_cast<std::size_t>(ls.order[r])];
      }
      statics[s].push_back(std::move(ls));
    }
  }

  TrainResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int counted = 0;
    for (std::size_t s = 0; s < data.size(); ++s) {
      ad::Tape tape;
      const ParamTensors pt = insert_params(tape, params, true);
      ad::Tensor total;
      bool has_loss = false;
      for (std::size_t l = 0; l < data[s].levels.size(); ++l) {
        const TrackletGraph& g = data[s].levels[l];
        if (g.edges.empty()) continue;
        const LevelStatic& ls = statics[s][l];
        auto [n0, e0] = init_features(tape, g, pt, cfg,
                                      static_cast<int>(l), ls.order);
        auto [fn, fe] = message_pass(tape, g, n0, e0, pt, cfg, ls.order);
        const ad::Tensor scores = classify_edges(fe, pt);
        const ad::Tensor loss =
            ad::focal_loss(scores, tape.leaf(ls.labels), tcfg.gamma);
        total = has_loss ? ad::add(total, loss) : loss;
        has_loss = true;
      }
      if (!has_loss) continue;
      tape.backward(total);
      epoch_loss += tape.value(total)(0, 0);
      counted += 1;

      std::vector<const Eigen::MatrixXd*> grads;
      const auto leaves = {pt.node_enc.w1,   pt.node_enc.b1,
                           pt.node_enc.w2,   pt.node_enc.b2,
                           pt.edge_enc.w1,   pt.edge_enc.b1,
                           pt.edge_enc.w2,   pt.edge_enc.b2,
                           pt.edge_update.w1, pt.edge_update.b1,
                           pt.edge_update.w2, pt.edge_update.b2,
                           pt.node_update.w1, pt.node_update.b1,
                           pt.node_update.w2, pt.node_update.b2,
                           pt.classifier.w1, pt.classifier.b1,
                           pt.classifier.w2, pt.classifier.b2};
      for (const ad::Tensor& t : leaves) grads.push_back(&tape.grad(t));
      for (const ad::Tensor& t : pt.adapters) grads.push_back(&tape.grad(t));
      adam.step(plist, grads);
    }
    if (counted == 0) {
      throw std::invalid_argument("train: no sample contributed any edges");
    }
    const double mean_loss = epoch_loss / counted;
    result.loss_history.push_back(mean_loss);
    result.epochs_run = epoch + 1;

    if (tcfg.patience > 0) {
      if (mean_loss < best_loss - tcfg.min_delta) {
        best_loss = mean_loss;
        best_epoch = epoch;
      } else if (epoch - best_epoch >= tcfg.patience) {
        break;
      }
    }
  }
  result.params = std::move(params);
  return result;
}

namespace {

void append_matrix(std::string& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.append(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
}

json config_to_json(const MpnnConfig& cfg) {
  return json{{"l_mp", cfg.l_mp},
              {"hl", cfg.hl},
              {"d_app", cfg.d_app},
              {"node_dim", cfg.node_dim},
              {"edge_dim", cfg.edge_dim},
              {"node_hidden", cfg.node_hidden},
              {"edge_hidden", cfg.edge_hidden},
              {"edge_update_hidden", cfg.edge_update_hidden},
              {"node_update_hidden", cfg.node_update_hidden},
              {"classifier_hidden", cfg.classifier_hidden},
              {"message_uses_neighbor", cfg.message_uses_neighbor},
              {"init_gain", cfg.init_gain}};
}

MpnnConfig config_from_json(const json& j) {
  MpnnConfig cfg;
  cfg.l_mp = j.at("l_mp").get<int>();
  cfg.hl = j.at("hl").get<int>();
  cfg.d_app = j.at("d_app").get<int>();
  cfg.node_dim = j.at("node_dim").get<int>();
  cfg.edge_dim = j.at("edge_dim").get<int>();
  cfg.node_hidden = j.at("node_hidden").get<int>();
  cfg.edge_hidden = j.at("edge_hidden").get<int>();
  cfg.edge_update_hidden = j.at("edge_update_hidden").get<int>();
  cfg.node_update_hidden = j.at("node_update_hidden").get<int>();
  cfg.classifier_hidden = j.at("classifier_hidden").get<int>();
  cfg.message_uses_neighbor = j.at("message_uses_neighbor").get<bool>();
  cfg.init_gain = j.at("init_gain").get<double>();
  return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const MpnnConfig& cfg) {
  json manifest;
  manifest["format"] = "motkit-checkpoint";
  manifest["version"] = 1;
  manifest["hyper"] = config_to_json(cfg);
  json tensors = json::array();
  for (const auto& [name, m] : params.named_tensors()) {
    tensors.push_back(
        {{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  }
  manifest["tensors"] = std::move(tensors);

  std::string payload = manifest.dump();
  payload.push_back('\n');
  for (const auto& [name, m] : params.named_tensors()) {
    append_matrix(payload, *m);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("save_checkpoint: cannot open '" + path +
                             "' for writing");
  }
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) {
    throw std::runtime_error("save_checkpoint: short write to '" + path + "'");
  }
}

std::pair<ModelParams, MpnnConfig> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_checkpoint: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_checkpoint: '" + path +
                             "' is missing its manifest line");
  }
  json manifest;
  try {
    manifest = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error("load_checkpoint: '" + path +
                             "' manifest is not valid JSON: " + e.what());
  }
  if (manifest.value("format", "") != "motkit-checkpoint" ||
      manifest.value("version", 0) != 1) {
    throw std::runtime_error("load_checkpoint: '" + path +
                             "' is not a version-1 checkpoint");
  }
  const MpnnConfig cfg = config_from_json(manifest.at("hyper"));
  ModelParams params = ModelParams::init(cfg, 0);

  auto named = params.named_tensors();
  const json& tensors = manifest.at("tensors");
  if (tensors.size() != named.size()) {
    std::ostringstream os;
    os << "load_checkpoint: manifest lists " << tensors.size()
       << " tensors, model has " << named.size();
    throw std::runtime_error(os.str());
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const json& t = tensors[i];
    Eigen::MatrixXd& m = *named[i].second;
    if (t.at("name").get<std::string>() != named[i].first ||
        t.at("rows").get<Eigen::Index>() != m.rows() ||
        t.at("cols").get<Eigen::Index>() != m.cols()) {
      std::ostringstream os;
      os << "load_checkpoint: tensor " << i << " ('"
         << t.at("name").get<std::string>() << "') does not match expected '"
         << named[i].first << "' of shape " << m.rows() << "x" << m.cols();
      throw std::runtime_error(os.str());
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double v = 0.0;
        if (!in.read(reinterpret_cast<char*>(&v), sizeof(double))) {
          throw std::runtime_error("load_checkpoint: '" + path +
                                   "' payload is truncated");
        }
        m(r, c) = v;
      }
    }
  }
  return {std::move(params), cfg};
}

}  // namespace mot
