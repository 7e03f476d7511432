#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mot/autodiff.hpp"
#include "mot/tgraph.hpp"

namespace mot {

// One hidden layer, ReLU inside, linear output.
struct MlpParams {
  Eigen::MatrixXd w1, b1, w2, b2;  // in x hidden, 1 x hidden, hidden x out, 1 x out
};

struct MpnnConfig {
  int l_mp = 12;  // message-passing iterations
  int hl = 3;     // hierarchy levels (one adapter each)
  int d_app = 16;            // appearance embedding width fed to the node encoder
  int node_dim = 32;         // node feature width
  int edge_dim = 16;         // edge feature width
  int node_hidden = 64;
  int edge_hidden = 32;
  int edge_update_hidden = 32;
  int node_update_hidden = 64;
  int classifier_hidden = 8;
  // The printed update builds a node's message from its own previous feature;
  // set true to use the neighbor's feature instead.
  bool message_uses_neighbor = false;
  double init_gain = 0.5;  // scales the uniform Xavier limits
};

struct ModelParams {
  MlpParams node_enc;     // d_app -> node_dim
  MlpParams edge_enc;     // 8 -> edge_dim
  MlpParams edge_update;  // 2*node_dim + edge_dim -> edge_dim
  MlpParams node_update;  // node_dim + edge_dim -> node_dim
  MlpParams classifier;   // edge_dim -> 1
  std::vector<Eigen::MatrixXd> adapters;  // hl rows of 1 x edge_dim, zero-init

  // Deterministic Xavier-uniform initialization; biases and adapters zero.
  static ModelParams init(const MpnnConfig& cfg, std::uint64_t seed);

  // Stable enumeration used by the optimizer and the checkpoint format.
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> named_tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> named_tensors()
      const;
};

// Tape-resident copies of the parameters for one forward/backward pass.
struct ParamTensors {
  struct Mlp {
    ad::Tensor w1, b1, w2, b2;
  };
  Mlp node_enc, edge_enc, edge_update, node_update, classifier;
  std::vector<ad::Tensor> adapters;
};

ParamTensors insert_params(ad::Tape& tape, const ModelParams& params,
                           bool requires_grad);

// Edge rows are always processed sorted by the endpoint tracklet ids (earlier
// first), so results do not depend on how the caller happened to index the
// nodes. order[r] = index into graph.edges of tensor row r.
std::vector<int> canonical_edge_order(const TrackletGraph& graph);

// Encodes node inputs and raw edge features; the level adapter is added to
// every initial edge feature. Throws when level is outside [0, hl).
std::pair<ad::Tensor, ad::Tensor> init_features(ad::Tape& tape,
                                                const TrackletGraph& graph,
                                                const ParamTensors& pt,
                                                const MpnnConfig& cfg,
                                                int level,
                                                const std::vector<int>& order);

// l_mp rounds of alternating edge and node updates. Each edge passes one
// message to each endpoint; a node's new feature is the sum of its incoming
// messages, and nodes with no edges carry their feature forward unchanged.
std::pair<ad::Tensor, ad::Tensor> message_pass(ad::Tape& tape,
                                               const TrackletGraph& graph,
                                               ad::Tensor f_nodes,
                                               ad::Tensor f_edges,
                                               const ParamTensors& pt,
                                               const MpnnConfig& cfg,
                                               const std::vector<int>& order);

// Per-edge probability that the endpoints belong together: sigmoid of the
// classifier MLP over the final edge features. Rows follow `order`.
ad::Tensor classify_edges(ad::Tensor f_edges, const ParamTensors& pt);

// Whole forward pass on a private tape; scores returned in graph edge order.
std::vector<double> score_edges(const TrackletGraph& graph,
                                const ModelParams& params,
                                const MpnnConfig& cfg, int level);

// One sequence's teacher-forced training input: the labeled graph at every
// hierarchy level (levels[l] feeds the level-l adapter).
struct TrainSample {
  std::vector<TrackletGraph> levels;
};

struct TrainConfig {
  int epochs = 500;
  double gamma = 1.0;  // focal-loss focusing exponent
  ad::AdamConfig adam;
  int patience = 0;         // early stop after this many stale epochs; 0 = off
  double min_delta = 1e-4;  // improvement below this counts as stale
};

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // mean per-sample loss per epoch
  int epochs_run = 0;
};

// Joint training across levels: per sample, the loss sums the focal losses of
// every level's edge scores against its labels; one optimizer step per
// sample. Deterministic given inputs.
TrainResult train(const std::vector<TrainSample>& data, ModelParams params,
                  const MpnnConfig& cfg, const TrainConfig& tcfg);

// Checkpointing: one-line JSON manifest (tensor names/shapes, hyperparameters,
// format version) followed by raw little-endian 64-bit floats.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const MpnnConfig& cfg);
std::pair<ModelParams, MpnnConfig> load_checkpoint(const std::string& path);

}  // namespace mot
