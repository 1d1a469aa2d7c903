#pragma once

#include <Eigen/Core>

#include "abspec/autodiff.hpp"

namespace abspec::absa {

using Mat = Eigen::MatrixXd;

// Attention-over-attention tensors for snippet rows a (n x d) against
// aspect rows b (m x d):
//   I     = a b^T                     (n x m interaction)
//   alpha = column-wise softmax of I  (aspect-to-snippet attention)
//   beta  = row-wise softmax of I     (snippet-to-aspect attention)
//   beta_bar_j = mean_i beta_ij
//   gamma = alpha beta_bar            (attention over averaged attention)
struct AoaAttention {
  Mat I;
  Mat alpha;
  Mat beta;
  Eigen::VectorXd beta_bar;  // length m, sums to 1
  Eigen::VectorXd gamma;     // length n, sums to 1
};

AoaAttention aoa_attention(const Mat& a, const Mat& b);

// r = a^T gamma: the gamma-weighted combination of snippet rows. Each
// coordinate stays inside the per-column range of a.
Eigen::VectorXd aoa_pool(const Mat& a, const Eigen::VectorXd& gamma);

// Final snippet representation: sequence-level vector followed by the
// pooled vector, length 2d.
Eigen::VectorXd cls_concat(const Eigen::VectorXd& h0, const Eigen::VectorXd& r_aoa);

}  // namespace abspec::absa
