#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <vector>

// Reverse-mode automatic differentiation over dense double matrices.
// Graphs are built eagerly by the free-function ops below; backward()
// walks the graph once in reverse topological order. Nodes that do not
// depend on any parameter carry no closure, so inference-only forwards
// pay almost nothing for the machinery.
namespace abspec::ad {

using Mat = Eigen::MatrixXd;

namespace detail {
struct Node {
  Mat value;
  Mat grad;
  bool requires_grad = false;
  bool grad_ready = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Mat& g);
  const Mat& grad_or_zero();
};
}  // namespace detail

class Var {
 public:
  Var() = default;
  explicit Var(Mat value, bool requires_grad = false);

  static Var constant(Mat value) { return Var(std::move(value), false); }
  static Var param(Mat value) { return Var(std::move(value), true); }

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  // Zero matrix of the value's shape when no gradient has been accumulated.
  const Mat& grad() const { return node_->grad_or_zero(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  void zero_grad();

  std::shared_ptr<detail::Node> node_;
};

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var cmul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
// r is 1 x cols(x), broadcast-added to every row.
Var add_rowvec(const Var& x, const Var& r);
Var row_softmax(const Var& x);
Var col_softmax(const Var& x);
// Per-row layer norm with learned gain/bias (both 1 x cols).
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);
Var tanh_v(const Var& x);
Var sigmoid_v(const Var& x);
Var exp_v(const Var& x);
Var log_v(const Var& x);
Var sqrt_v(const Var& x);
Var abs_v(const Var& x);
Var clamp_v(const Var& x, double lo, double hi);
Var slice_rows(const Var& x, Eigen::Index r0, Eigen::Index n);
Var slice_cols(const Var& x, Eigen::Index c0, Eigen::Index n);
Var hcat(const Var& a, const Var& b);
Var vcat(const Var& a, const Var& b);
Var sum_all(const Var& x);   // 1x1
Var mean_all(const Var& x);  // 1x1
Var col_mean(const Var& x);  // 1 x cols, mean over rows
Var sum_vars(const std::vector<Var>& xs);
// value = rows of table selected by idx; backward scatter-adds.
Var gather_rows(const Var& table, const std::vector<int>& idx);
// logits is 1 x K; value = weight * (logsumexp(logits) - logits[target]).
Var softmax_xent(const Var& logits, int target, double weight = 1.0);
// logit is 1x1; value = softplus(z) - target*z, the stable binary cross entropy.
Var bce_with_logits(const Var& logit, double target);

// loss must be 1x1. Accumulates gradients into every reachable
// requires-grad node; leaves with requires_grad are the parameters.
void backward(const Var& loss);

}  // namespace abspec::ad
