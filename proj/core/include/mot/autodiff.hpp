#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace mot::ad {

class Tape;

// Lightweight handle into a tape. Values are dense 2-D matrices; scalars are
// 1x1. Copying a Tensor copies the handle, not the data.
struct Tensor {
  Tape* tape = nullptr;
  int node = -1;
  int rows = 0;
  int cols = 0;
};

// Records a forward computation and replays it in reverse for gradients.
// One tape per training step; all Tensors die with their tape.
class Tape {
 public:
  Tensor leaf(const Eigen::MatrixXd& value, bool requires_grad = false);

  const Eigen::MatrixXd& value(const Tensor& t) const;
  // Gradient of the last backward() target w.r.t. t; zero matrix before then.
  const Eigen::MatrixXd& grad(const Tensor& t) const;

  // Reverse sweep from a scalar. Throws if `loss` is not 1x1.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

  // Low-level hooks used by the op implementations; not meant for model code.
  Tensor make(Eigen::MatrixXd value, bool requires_grad);
  void set_back(const Tensor& t, std::function<void()> back);
  bool requires_grad(const Tensor& t) const;
  Eigen::MatrixXd& mutable_grad(const Tensor& t);

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    bool requires_grad = false;
    std::function<void()> back;  // accumulates into parents' grad
  };

  std::vector<Node> nodes_;
};

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);   // same shape
Tensor sub(const Tensor& a, const Tensor& b);   // same shape
Tensor mul(const Tensor& a, const Tensor& b);   // elementwise, same shape
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
// a: m x n, row: 1 x n added to every row of a (bias application).
Tensor add_row_broadcast(const Tensor& a, const Tensor& row);
// Horizontal concatenation; all inputs share a row count.
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor relu(const Tensor& a);
// Logits are clamped to [-30, 30] first so downstream logs stay finite.
Tensor sigmoid(const Tensor& a);
Tensor log(const Tensor& a);  // inputs must be strictly positive
Tensor powc(const Tensor& a, double exponent);  // elementwise, constant power
Tensor sum(const Tensor& a);   // 1x1
Tensor mean(const Tensor& a);  // 1x1
// out.row(r) = a.row(indices[r]); indices may repeat.
Tensor gather_rows(const Tensor& a, const std::vector<int>& indices);
// out.row(s) = sum of a's rows with segment id s; ids in [0, num_segments).
// Permutation-invariant: shuffling rows together with their ids changes
// nothing.
Tensor segment_sum(const Tensor& a, const std::vector<int>& segment_ids,
                   int num_segments);

// Mean over entries of -(1 - p_t)^gamma * log(p_t) with p_t = p when y = 1
// and 1 - p otherwise. `labels` must hold exact zeros and ones; gamma = 0
// reduces to binary cross-entropy identically.
Tensor focal_loss(const Tensor& scores, const Tensor& labels, double gamma);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled, applied directly to parameters
};

// First/second moment accumulators for a fixed list of parameter shapes.
class AdamState {
 public:
  AdamState(const std::vector<Eigen::MatrixXd*>& params, AdamConfig cfg);

  // One update step; `grads` ordered like the constructor's parameter list.
  void step(const std::vector<Eigen::MatrixXd*>& params,
            const std::vector<const Eigen::MatrixXd*>& grads);

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
};

}  // namespace mot::ad
