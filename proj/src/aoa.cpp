#include "abspec/aoa.hpp"

#include <cmath>

#include "abspec/errors.hpp"

namespace abspec::absa {

AoaAttention aoa_attention(const Mat& a, const Mat& b) {
  if (a.rows() < 1 || b.rows() < 1)
    throw DataError("aoa_attention: need at least one snippet and one aspect row");
  if (a.cols() != b.cols())
    throw DataError("aoa_attention: hidden dimensions differ");
  if (!a.allFinite() || !b.allFinite())
    throw DataError("aoa_attention: non-finite input");

  AoaAttention out;
  out.I = a * b.transpose();
  const Eigen::Index n = out.I.rows(), m = out.I.cols();

  out.alpha.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::VectorXd col = out.I.col(j);
    double mx = col.maxCoeff();
    Eigen::VectorXd e = (col.array() - mx).exp().matrix();
    out.alpha.col(j) = e / e.sum();
  }

  out.beta.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd row = out.I.row(i);
    double mx = row.maxCoeff();
    Eigen::RowVectorXd e = (row.array() - mx).exp().matrix();
    out.beta.row(i) = e / e.sum();
  }

  out.beta_bar = out.beta.colwise().mean().transpose();
  out.gamma = out.alpha * out.beta_bar;
  return out;
}

Eigen::VectorXd aoa_pool(const Mat& a, const Eigen::VectorXd& gamma) {
  if (a.rows() != gamma.size())
    throw DataError("aoa_pool: gamma length must equal the snippet row count");
  if (std::abs(gamma.sum() - 1.0) > 1e-6)
    throw DataError("aoa_pool: gamma must sum to one");
  return a.transpose() * gamma;
}

Eigen::VectorXd cls_concat(const Eigen::VectorXd& h0, const Eigen::VectorXd& r_aoa) {
  if (h0.size() != r_aoa.size())
    throw DataError("cls_concat: dimension mismatch");
  Eigen::VectorXd r(h0.size() + r_aoa.size());
  r << h0, r_aoa;
  return r;
}

}  // namespace abspec::absa
