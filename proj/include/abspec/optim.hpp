#pragma once

#include <vector>

#include "abspec/autodiff.hpp"

namespace abspec {

void zero_grads(std::vector<ad::Var>& params);

class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(std::vector<ad::Var>& params);

 private:
  double lr_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(std::vector<ad::Var>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<ad::Mat> m_, v_;
};

}  // namespace abspec
