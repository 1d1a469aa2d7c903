#include "abspec/optim.hpp"

#include <cmath>

namespace abspec {

void zero_grads(std::vector<ad::Var>& params) {
  for (auto& p : params) p.zero_grad();
}

void Sgd::step(std::vector<ad::Var>& params) {
  for (auto& p : params) p.mutable_value() -= lr_ * p.grad();
}

void Adam::step(std::vector<ad::Var>& params) {
  if (m_.empty()) {
    for (auto& p : params) {
      m_.push_back(ad::Mat::Zero(p.rows(), p.cols()));
      v_.push_back(ad::Mat::Zero(p.rows(), p.cols()));
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    const ad::Mat& g = params[i].grad();
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    ad::Mat mhat = m_[i] / bc1;
    ad::Mat vhat = v_[i] / bc2;
    params[i].mutable_value() -=
        lr_ * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
  }
}

}  // namespace abspec
