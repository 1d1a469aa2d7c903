#include "abspec/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace abspec::ad {

namespace detail {

void Node::accumulate(const Mat& g) {
  if (!grad_ready) {
    grad = Mat::Zero(value.rows(), value.cols());
    grad_ready = true;
  }
  grad += g;
}

const Mat& Node::grad_or_zero() {
  if (!grad_ready) {
    grad = Mat::Zero(value.rows(), value.cols());
    grad_ready = true;
  }
  return grad;
}

}  // namespace detail

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

Var::Var(Mat value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

void Var::zero_grad() {
  node_->grad_ready = false;
  node_->grad.resize(0, 0);
}

namespace {

Var make_node(Mat value, std::initializer_list<Var> parents,
              std::function<void(Node&)> backward) {
  Var out(std::move(value), false);
  bool needs = false;
  for (const Var& p : parents) needs = needs || p.requires_grad();
  if (needs) {
    out.node_->requires_grad = true;
    for (const Var& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims differ");
  NodePtr an = a.node_, bn = b.node_;
  return make_node(a.value() * b.value(), {a, b}, [an, bn](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad * bn->value.transpose());
    if (bn->requires_grad) bn->accumulate(an->value.transpose() * n.grad);
  });
}

Var transpose(const Var& a) {
  NodePtr an = a.node_;
  return make_node(a.value().transpose(), {a},
                   [an](Node& n) { an->accumulate(n.grad.transpose()); });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  NodePtr an = a.node_, bn = b.node_;
  return make_node(a.value() + b.value(), {a, b}, [an, bn](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad);
    if (bn->requires_grad) bn->accumulate(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  NodePtr an = a.node_, bn = b.node_;
  return make_node(a.value() - b.value(), {a, b}, [an, bn](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad);
    if (bn->requires_grad) bn->accumulate(-n.grad);
  });
}

Var cmul(const Var& a, const Var& b) {
  check_same_shape(a, b, "cmul");
  NodePtr an = a.node_, bn = b.node_;
  return make_node(a.value().cwiseProduct(b.value()), {a, b}, [an, bn](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad.cwiseProduct(bn->value));
    if (bn->requires_grad) bn->accumulate(n.grad.cwiseProduct(an->value));
  });
}

Var scale(const Var& a, double s) {
  NodePtr an = a.node_;
  return make_node(a.value() * s, {a},
                   [an, s](Node& n) { an->accumulate(n.grad * s); });
}

Var add_scalar(const Var& a, double s) {
  NodePtr an = a.node_;
  return make_node((a.value().array() + s).matrix(), {a},
                   [an](Node& n) { an->accumulate(n.grad); });
}

Var add_rowvec(const Var& x, const Var& r) {
  if (r.rows() != 1 || r.cols() != x.cols())
    throw std::invalid_argument("add_rowvec: r must be 1 x cols(x)");
  NodePtr xn = x.node_, rn = r.node_;
  Mat v = x.value();
  v.rowwise() += r.value().row(0);
  return make_node(std::move(v), {x, r}, [xn, rn](Node& n) {
    if (xn->requires_grad) xn->accumulate(n.grad);
    if (rn->requires_grad) rn->accumulate(n.grad.colwise().sum());
  });
}

Var row_softmax(const Var& x) {
  Mat v = x.value();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    Eigen::RowVectorXd row = v.row(i);
    double mx = row.maxCoeff();
    row = (row.array() - mx).exp().matrix();
    v.row(i) = row / row.sum();
  }
  NodePtr xn = x.node_;
  Var out = make_node(std::move(v), {x}, [xn](Node& n) {
    Mat dx(n.value.rows(), n.value.cols());
    for (Eigen::Index i = 0; i < n.value.rows(); ++i) {
      const auto s = n.value.row(i).array();
      const auto g = n.grad.row(i).array();
      double dot = (g * s).sum();
      dx.row(i) = (s * (g - dot)).matrix();
    }
    xn->accumulate(dx);
  });
  return out;
}

Var col_softmax(const Var& x) {
  Mat v = x.value();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::VectorXd col = v.col(j);
    double mx = col.maxCoeff();
    col = (col.array() - mx).exp().matrix();
    v.col(j) = col / col.sum();
  }
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    Mat dx(n.value.rows(), n.value.cols());
    for (Eigen::Index j = 0; j < n.value.cols(); ++j) {
      const auto s = n.value.col(j).array();
      const auto g = n.grad.col(j).array();
      double dot = (g * s).sum();
      dx.col(j) = (s * (g - dot)).matrix();
    }
    xn->accumulate(dx);
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 ||
      bias.cols() != x.cols())
    throw std::invalid_argument("layer_norm_rows: gain/bias must be 1 x cols(x)");
  const Eigen::Index rows = x.rows(), cols = x.cols();
  Mat xhat(rows, cols);
  Eigen::VectorXd sigma(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double mu = x.value().row(i).mean();
    Eigen::RowVectorXd centered = (x.value().row(i).array() - mu).matrix();
    double var = centered.squaredNorm() / static_cast<double>(cols);
    sigma(i) = std::sqrt(var + eps);
    xhat.row(i) = centered / sigma(i);
  }
  Mat v(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    v.row(i) = xhat.row(i).cwiseProduct(gain.value().row(0)) + bias.value().row(0);
  NodePtr xn = x.node_, gn = gain.node_, bn = bias.node_;
  return make_node(std::move(v), {x, gain, bias},
                   [xn, gn, bn, xhat, sigma, cols](Node& n) {
    if (gn->requires_grad) gn->accumulate(n.grad.cwiseProduct(xhat).colwise().sum());
    if (bn->requires_grad) bn->accumulate(n.grad.colwise().sum());
    if (xn->requires_grad) {
      Mat dx(n.grad.rows(), cols);
      for (Eigen::Index i = 0; i < n.grad.rows(); ++i) {
        Eigen::RowVectorXd u = n.grad.row(i).cwiseProduct(gn->value.row(0));
        double mean_u = u.mean();
        double mean_ux = u.cwiseProduct(xhat.row(i)).mean();
        dx.row(i) =
            ((u.array() - mean_u - xhat.row(i).array() * mean_ux) / sigma(i))
                .matrix();
      }
      xn->accumulate(dx);
    }
  });
}

Var tanh_v(const Var& x) {
  Mat v = x.value().array().tanh().matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    xn->accumulate((n.grad.array() * (1.0 - n.value.array().square())).matrix());
  });
}

Var sigmoid_v(const Var& x) {
  Mat v = (1.0 / (1.0 + (-x.value().array()).exp())).matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    xn->accumulate(
        (n.grad.array() * n.value.array() * (1.0 - n.value.array())).matrix());
  });
}

Var exp_v(const Var& x) {
  Mat v = x.value().array().exp().matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    xn->accumulate((n.grad.array() * n.value.array()).matrix());
  });
}

Var log_v(const Var& x) {
  Mat v = x.value().array().log().matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    xn->accumulate((n.grad.array() / xn->value.array()).matrix());
  });
}

Var sqrt_v(const Var& x) {
  Mat v = x.value().array().sqrt().matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    // subgradient 0 at the origin
    Mat dx = n.grad;
    for (Eigen::Index i = 0; i < dx.size(); ++i) {
      double s = n.value.data()[i];
      dx.data()[i] = s > 0.0 ? dx.data()[i] * 0.5 / s : 0.0;
    }
    xn->accumulate(dx);
  });
}

Var abs_v(const Var& x) {
  Mat v = x.value().array().abs().matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    Mat sign = xn->value.array().sign().matrix();
    xn->accumulate(n.grad.cwiseProduct(sign));
  });
}

Var clamp_v(const Var& x, double lo, double hi) {
  Mat v = x.value().array().max(lo).min(hi).matrix();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn, lo, hi](Node& n) {
    Mat dx = n.grad;
    for (Eigen::Index i = 0; i < dx.size(); ++i) {
      double orig = xn->value.data()[i];
      if (orig <= lo || orig >= hi) dx.data()[i] = 0.0;
    }
    xn->accumulate(dx);
  });
}

Var slice_rows(const Var& x, Eigen::Index r0, Eigen::Index n) {
  if (r0 < 0 || n < 0 || r0 + n > x.rows())
    throw std::invalid_argument("slice_rows: out of range");
  NodePtr xn = x.node_;
  return make_node(x.value().middleRows(r0, n), {x}, [xn, r0, n](Node& nd) {
    Mat dx = Mat::Zero(xn->value.rows(), xn->value.cols());
    dx.middleRows(r0, n) = nd.grad;
    xn->accumulate(dx);
  });
}

Var slice_cols(const Var& x, Eigen::Index c0, Eigen::Index n) {
  if (c0 < 0 || n < 0 || c0 + n > x.cols())
    throw std::invalid_argument("slice_cols: out of range");
  NodePtr xn = x.node_;
  return make_node(x.value().middleCols(c0, n), {x}, [xn, c0, n](Node& nd) {
    Mat dx = Mat::Zero(xn->value.rows(), xn->value.cols());
    dx.middleCols(c0, n) = nd.grad;
    xn->accumulate(dx);
  });
}

Var hcat(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
  Mat v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  NodePtr an = a.node_, bn = b.node_;
  Eigen::Index ac = a.cols();
  return make_node(std::move(v), {a, b}, [an, bn, ac](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad.leftCols(ac));
    if (bn->requires_grad) bn->accumulate(n.grad.rightCols(n.grad.cols() - ac));
  });
}

Var vcat(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vcat: col mismatch");
  Mat v(a.rows() + b.rows(), a.cols());
  v << a.value(), b.value();
  NodePtr an = a.node_, bn = b.node_;
  Eigen::Index ar = a.rows();
  return make_node(std::move(v), {a, b}, [an, bn, ar](Node& n) {
    if (an->requires_grad) an->accumulate(n.grad.topRows(ar));
    if (bn->requires_grad) bn->accumulate(n.grad.bottomRows(n.grad.rows() - ar));
  });
}

Var sum_all(const Var& x) {
  Mat v(1, 1);
  v(0, 0) = x.value().sum();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn](Node& n) {
    xn->accumulate(Mat::Constant(xn->value.rows(), xn->value.cols(), n.grad(0, 0)));
  });
}

Var mean_all(const Var& x) {
  double inv = 1.0 / static_cast<double>(x.value().size());
  Mat v(1, 1);
  v(0, 0) = x.value().sum() * inv;
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn, inv](Node& n) {
    xn->accumulate(
        Mat::Constant(xn->value.rows(), xn->value.cols(), n.grad(0, 0) * inv));
  });
}

Var col_mean(const Var& x) {
  double inv = 1.0 / static_cast<double>(x.rows());
  Mat v = x.value().colwise().mean();
  NodePtr xn = x.node_;
  return make_node(std::move(v), {x}, [xn, inv](Node& n) {
    Mat dx(xn->value.rows(), xn->value.cols());
    for (Eigen::Index i = 0; i < dx.rows(); ++i) dx.row(i) = n.grad.row(0) * inv;
    xn->accumulate(dx);
  });
}

Var sum_vars(const std::vector<Var>& xs) {
  if (xs.empty()) throw std::invalid_argument("sum_vars: empty");
  Mat v = xs[0].value();
  for (size_t i = 1; i < xs.size(); ++i) {
    check_same_shape(xs[0], xs[i], "sum_vars");
    v += xs[i].value();
  }
  Var out(std::move(v), false);
  bool needs = false;
  for (const Var& x : xs) needs = needs || x.requires_grad();
  if (needs) {
    out.node_->requires_grad = true;
    std::vector<NodePtr> parents;
    parents.reserve(xs.size());
    for (const Var& x : xs) parents.push_back(x.node_);
    out.node_->parents = parents;
    out.node_->backward = [parents](Node& n) {
      for (const NodePtr& p : parents)
        if (p->requires_grad) p->accumulate(n.grad);
    };
  }
  return out;
}

Var gather_rows(const Var& table, const std::vector<int>& idx) {
  Mat v(static_cast<Eigen::Index>(idx.size()), table.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= table.rows())
      throw std::invalid_argument("gather_rows: index out of range");
    v.row(static_cast<Eigen::Index>(i)) = table.value().row(idx[i]);
  }
  NodePtr tn = table.node_;
  return make_node(std::move(v), {table}, [tn, idx](Node& n) {
    Mat dt = Mat::Zero(tn->value.rows(), tn->value.cols());
    for (size_t i = 0; i < idx.size(); ++i)
      dt.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
    tn->accumulate(dt);
  });
}

Var softmax_xent(const Var& logits, int target, double weight) {
  if (logits.rows() != 1) throw std::invalid_argument("softmax_xent: logits must be 1 x K");
  if (target < 0 || target >= logits.cols())
    throw std::invalid_argument("softmax_xent: target out of range");
  const auto z = logits.value().row(0).array();
  double mx = z.maxCoeff();
  double lse = mx + std::log((z - mx).exp().sum());
  Mat v(1, 1);
  v(0, 0) = weight * (lse - z(target));
  NodePtr ln = logits.node_;
  return make_node(std::move(v), {logits}, [ln, target, weight, lse](Node& n) {
    Eigen::RowVectorXd p = (ln->value.row(0).array() - lse).exp().matrix();
    p(target) -= 1.0;
    ln->accumulate(n.grad(0, 0) * weight * p);
  });
}

Var bce_with_logits(const Var& logit, double target) {
  if (logit.rows() != 1 || logit.cols() != 1)
    throw std::invalid_argument("bce_with_logits: logit must be 1x1");
  double z = logit.value()(0, 0);
  double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  Mat v(1, 1);
  v(0, 0) = softplus - target * z;
  NodePtr ln = logit.node_;
  return make_node(std::move(v), {logit}, [ln, target](Node& n) {
    double z = ln->value(0, 0);
    double s = 1.0 / (1.0 + std::exp(-z));
    Mat d(1, 1);
    d(0, 0) = n.grad(0, 0) * (s - target);
    ln->accumulate(d);
  });
}

void backward(const Var& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    throw std::invalid_argument("backward: loss must be a defined 1x1 value");
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; children end up after their parents is wrong —
  // we need children first when reversed, so collect post-order then reverse.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node_.get(), 0);
  visited.insert(loss.node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  // order is post-order (parents before the node), so iterate from the back:
  // the loss node comes last in post-order.
  loss.node_->accumulate(Mat::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad_ready) node->backward(*node);
  }
}

}  // namespace abspec::ad
