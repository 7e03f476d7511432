#include "mot/autodiff.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mot::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a,
                              const Tensor& b) {
  std::ostringstream os;
  os << op << ": incompatible shapes (" << a.rows << "x" << a.cols << ") and ("
     << b.rows << "x" << b.cols << ")";
  throw std::invalid_argument(os.str());
}

void require_same_tape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.tape == nullptr || a.tape != b.tape) {
    std::ostringstream os;
    os << op << ": operands must live on one tape";
    throw std::invalid_argument(os.str());
  }
}

void require_finite(const char* op, const Eigen::MatrixXd& v) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << op << ": produced a non-finite value";
    throw std::domain_error(os.str());
  }
}

constexpr double kLogitClamp = 30.0;

}  // namespace

Tensor Tape::make(Eigen::MatrixXd value, bool requires_grad) {
  Node n;
  n.grad = Eigen::MatrixXd::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  Tensor t;
  t.tape = this;
  t.node = static_cast<int>(nodes_.size()) - 1;
  t.rows = static_cast<int>(nodes_.back().value.rows());
  t.cols = static_cast<int>(nodes_.back().value.cols());
  return t;
}

void Tape::set_back(const Tensor& t, std::function<void()> back) {
  nodes_[static_cast<std::size_t>(t.node)].back = std::move(back);
}

bool Tape::requires_grad(const Tensor& t) const {
  return nodes_[static_cast<std::size_t>(t.node)].requires_grad;
}

Eigen::MatrixXd& Tape::mutable_grad(const Tensor& t) {
  return nodes_[static_cast<std::size_t>(t.node)].grad;
}

Tensor Tape::leaf(const Eigen::MatrixXd& value, bool requires_grad) {
  require_finite("leaf", value);
  return make(value, requires_grad);
}

const Eigen::MatrixXd& Tape::value(const Tensor& t) const {
  return nodes_[static_cast<std::size_t>(t.node)].value;
}

const Eigen::MatrixXd& Tape::grad(const Tensor& t) const {
  return nodes_[static_cast<std::size_t>(t.node)].grad;
}

void Tape::backward(const Tensor& loss) {
  if (loss.rows != 1 || loss.cols != 1) {
    std::ostringstream os;
    os << "backward: loss must be a scalar, got (" << loss.rows << "x"
       << loss.cols << ")";
    throw std::invalid_argument(os.str());
  }
  for (Node& n : nodes_) n.grad.setZero();
  nodes_[static_cast<std::size_t>(loss.node)].grad(0, 0) = 1.0;
  for (int i = loss.node; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.back) n.back();
  }
}

// Each op computes its value, creates the output node, and — only when some
// parent needs a gradient — attaches a closure routing the output gradient
// back through the op's local Jacobian. Closures capture Tensor handles.

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape("matmul", a, b);
  if (a.cols != b.rows) shape_error("matmul", a, b);
  Tape* t = a.tape;
  Eigen::MatrixXd val = t->value(a) * t->value(b);
  require_finite("matmul", val);
  const bool rg = t->requires_grad(a) || t->requires_grad(b);
  Tensor out = t->make(std::move(val), rg);
  if (rg) {
    t->set_back(out, [t, a, b, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      if (t->requires_grad(a)) {
        t->mutable_grad(a).noalias() += g * t->value(b).transpose();
      }
      if (t->requires_grad(b)) {
        t->mutable_grad(b).noalias() += t->value(a).transpose() * g;
      }
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape("add", a, b);
  if (a.rows != b.rows || a.cols != b.cols) shape_error("add", a, b);
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a) || t->requires_grad(b);
  Tensor out = t->make(t->value(a) + t->value(b), rg);
  require_finite("add", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, b, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      if (t->requires_grad(a)) t->mutable_grad(a) += g;
      if (t->requires_grad(b)) t->mutable_grad(b) += g;
    });
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_tape("sub", a, b);
  if (a.rows != b.rows || a.cols != b.cols) shape_error("sub", a, b);
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a) || t->requires_grad(b);
  Tensor out = t->make(t->value(a) - t->value(b), rg);
  require_finite("sub", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, b, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      if (t->requires_grad(a)) t->mutable_grad(a) += g;
      if (t->requires_grad(b)) t->mutable_grad(b) -= g;
    });
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_tape("mul", a, b);
  if (a.rows != b.rows || a.cols != b.cols) shape_error("mul", a, b);
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a) || t->requires_grad(b);
  Tensor out =
      t->make((t->value(a).array() * t->value(b).array()).matrix(), rg);
  require_finite("mul", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, b, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      if (t->requires_grad(a)) {
        t->mutable_grad(a).array() += g.array() * t->value(b).array();
      }
      if (t->requires_grad(b)) {
        t->mutable_grad(b).array() += g.array() * t->value(a).array();
      }
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(t->value(a) * c, rg);
  require_finite("scale", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, out, c]() { t->mutable_grad(a) += c * t->grad(out); });
  }
  return out;
}

Tensor add_scalar(const Tensor& a, double c) {
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a);
  Tensor out = t->make((t->value(a).array() + c).matrix(), rg);
  require_finite("add_scalar", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, out]() { t->mutable_grad(a) += t->grad(out); });
  }
  return out;
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& row) {
  require_same_tape("add_row_broadcast", a, row);
  if (row.rows != 1 || row.cols != a.cols) {
    shape_error("add_row_broadcast", a, row);
  }
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a) || t->requires_grad(row);
  Tensor out = t->make(t->value(a).rowwise() + t->value(row).row(0), rg);
  require_finite("add_row_broadcast", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, row, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      if (t->requires_grad(a)) t->mutable_grad(a) += g;
      if (t->requires_grad(row)) {
        t->mutable_grad(row).row(0) += g.colwise().sum();
      }
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: needs at least one input");
  }
  Tape* t = parts.front().tape;
  int cols = 0;
  bool rg = false;
  for (const Tensor& p : parts) {
    require_same_tape("concat_cols", parts.front(), p);
    if (p.rows != parts.front().rows) {
      shape_error("concat_cols", parts.front(), p);
    }
    cols += p.cols;
    rg = rg || t->requires_grad(p);
  }
  Eigen::MatrixXd val(parts.front().rows, cols);
  int at = 0;
  for (const Tensor& p : parts) {
    val.middleCols(at, p.cols) = t->value(p);
    at += p.cols;
  }
  Tensor out = t->make(std::move(val), rg);
  if (rg) {
    const std::vector<Tensor> captured = parts;
    t->set_back(out, [t, captured, out]() {
      const Eigen::MatrixXd& g = t->grad(out);
      int at = 0;
      for (const Tensor& p : captured) {
        if (t->requires_grad(p)) {
          t->mutable_grad(p) += g.middleCols(at, p.cols);
        }
        at += p.cols;
      }
    });
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Tape* t = a.tape;
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(t->value(a).cwiseMax(0.0), rg);
  if (rg) {
    t->set_back(out, [t, a, out]() {
      t->mutable_grad(a).array() +=
          t->grad(out).array() * (t->value(a).array() > 0.0).cast<double>();
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tape* t = a.tape;
  Eigen::MatrixXd val =
      t->value(a).array().min(kLogitClamp).max(-kLogitClamp).unaryExpr(
          [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(val), rg);
  if (rg) {
    t->set_back(out, [t, a, out]() {
      // Slope is zero where the clamp was active, matching the forward.
      const auto vo = t->value(out).array();
      t->mutable_grad(a).array() +=
          t->grad(out).array() * vo * (1.0 - vo) *
          (t->value(a).array().abs() < kLogitClamp).cast<double>();
    });
  }
  return out;
}

Tensor log(const Tensor& a) {
  Tape* t = a.tape;
  if ((t->value(a).array() <= 0.0).any()) {
    throw std::domain_error("log: inputs must be strictly positive");
  }
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(t->value(a).array().log().matrix(), rg);
  require_finite("log", t->value(out));
  if (rg) {
    t->set_back(out, [t, a, out]() {
      t->mutable_grad(a).array() +=
          t->grad(out).array() / t->value(a).array();
    });
  }
  return out;
}

Tensor powc(const Tensor& a, double exponent) {
  Tape* t = a.tape;
  Eigen::MatrixXd val = t->value(a).array().unaryExpr(
      [exponent](double x) { return std::pow(x, exponent); });
  require_finite("powc", val);
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(val), rg);
  if (rg && exponent != 0.0) {
    t->set_back(out, [t, a, out, exponent]() {
      t->mutable_grad(a).array() +=
          t->grad(out).array() * exponent *
          t->value(a).array().unaryExpr([exponent](double x) {
            return std::pow(x, exponent - 1.0);
          });
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  Tape* t = a.tape;
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = t->value(a).sum();
  require_finite("sum", s);
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(s), rg);
  if (rg) {
    t->set_back(out, [t, a, out]() {
      t->mutable_grad(a).array() += t->grad(out)(0, 0);
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  Tape* t = a.tape;
  if (a.rows == 0 || a.cols == 0) {
    throw std::invalid_argument("mean: input must be non-empty");
  }
  Eigen::MatrixXd s(1, 1);
  s(0, 0) = t->value(a).mean();
  require_finite("mean", s);
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(s), rg);
  if (rg) {
    const double inv = 1.0 / (static_cast<double>(a.rows) * a.cols);
    t->set_back(out, [t, a, out, inv]() {
      t->mutable_grad(a).array() += t->grad(out)(0, 0) * inv;
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& indices) {
  Tape* t = a.tape;
  for (const int i : indices) {
    if (i < 0 || i >= a.rows) {
      std::ostringstream os;
      os << "gather_rows: index " << i << " out of range for " << a.rows
         << " rows";
      throw std::invalid_argument(os.str());
    }
  }
  Eigen::MatrixXd val(static_cast<int>(indices.size()), a.cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    val.row(static_cast<int>(r)) = t->value(a).row(indices[r]);
  }
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(val), rg);
  if (rg) {
    t->set_back(out, [t, a, out, indices]() {
      const Eigen::MatrixXd& g = t->grad(out);
      for (std::size_t r = 0; r < indices.size(); ++r) {
        t->mutable_grad(a).row(indices[r]) += g.row(static_cast<int>(r));
      }
    });
  }
  return out;
}

Tensor segment_sum(const Tensor& a, const std::vector<int>& segment_ids,
                   int num_segments) {
  Tape* t = a.tape;
  if (static_cast<int>(segment_ids.size()) != a.rows) {
    std::ostringstream os;
    os << "segment_sum: " << segment_ids.size() << " segment ids for "
       << a.rows << " rows";
    throw std::invalid_argument(os.str());
  }
  for (const int s : segment_ids) {
    if (s < 0 || s >= num_segments) {
      std::ostringstream os;
      os << "segment_sum: segment id " << s << " outside [0, " << num_segments
         << ")";
      throw std::invalid_argument(os.str());
    }
  }
  Eigen::MatrixXd val = Eigen::MatrixXd::Zero(num_segments, a.cols);
  for (int r = 0; r < a.rows; ++r) {
    val.row(segment_ids[static_cast<std::size_t>(r)]) += t->value(a).row(r);
  }
  const bool rg = t->requires_grad(a);
  Tensor out = t->make(std::move(val), rg);
  if (rg) {
    t->set_back(out, [t, a, out, segment_ids]() {
      const Eigen::MatrixXd& g = t->grad(out);
      for (std::size_t r = 0; r < segment_ids.size(); ++r) {
        t->mutable_grad(a).row(static_cast<int>(r)) += g.row(segment_ids[r]);
      }
    });
  }
  return out;
}

Tensor focal_loss(const Tensor& scores, const Tensor& labels, double gamma) {
  require_same_tape("focal_loss", scores, labels);
  if (scores.rows != labels.rows || scores.cols != labels.cols) {
    shape_error("focal_loss", scores, labels);
  }
  Tape* t = scores.tape;
  const Eigen::MatrixXd& y = t->value(labels);
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) {
    throw std::invalid_argument("focal_loss: labels must be exactly 0 or 1");
  }
  // p_t = y*p + (1-y)*(1-p), all recorded so gradients flow to the scores.
  Tensor one = t->leaf(Eigen::MatrixXd::Ones(scores.rows, scores.cols));
  Tensor p_t =
      add(mul(labels, scores), mul(sub(one, labels), sub(one, scores)));
  Tensor weight = powc(sub(one, p_t), gamma);
  return scale(mean(mul(weight, log(p_t))), -1.0);
}

AdamState::AdamState(const std::vector<Eigen::MatrixXd*>& params,
                     AdamConfig cfg)
    : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Eigen::MatrixXd* p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
  }
}

void AdamState::step(const std::vector<Eigen::MatrixXd*>& params,
                     const std::vector<const Eigen::MatrixXd*>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("adam step: parameter list size changed");
  }
  t_ += 1;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::MatrixXd& p = *params[i];
    const Eigen::MatrixXd& g = *grads[i];
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      std::ostringstream os;
      os << "adam step: parameter " << i << " is " << p.rows() << "x"
         << p.cols() << " but its gradient is " << g.rows() << "x" << g.cols();
      throw std::invalid_argument(os.str());
    }
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i].array() =
        cfg_.beta2 * v_[i].array() + (1.0 - cfg_.beta2) * g.array().square();
    const Eigen::ArrayXXd m_hat = m_[i].array() / bc1;
    const Eigen::ArrayXXd v_hat = v_[i].array() / bc2;
    p.array() -= cfg_.lr * (m_hat / (v_hat.sqrt() + cfg_.eps) +
                            cfg_.weight_decay * p.array());
  }
}

}  // namespace mot::ad
