#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace abspec {

struct ClassCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long support() const { return tp + fn; }
};

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // false when the denominator was zero and the value was defined as 0
  bool precision_defined = true;
  bool recall_defined = true;
};

Prf1 prf1(const ClassCounts& counts);

struct Aggregates {
  double macro_f1 = 0.0;     // unweighted mean of class F1s
  double weighted_f1 = 0.0;  // support-weighted mean
};

Aggregates aggregate(const std::vector<double>& f1s, const std::vector<long>& supports);

// Disjoint folds covering 0..n-1 with sizes differing by at most one;
// deterministic for a fixed seed.
std::vector<std::vector<size_t>> kfold_split(size_t n, int k, uint64_t seed);
// Per-label round robin, same guarantees per class.
std::vector<std::vector<size_t>> stratified_kfold_split(const std::vector<int>& labels,
                                                        int k, uint64_t seed);

struct ClassReport {
  std::string name;
  long truth = 0;
  long predicted = 0;
  ClassCounts counts;
  Prf1 metrics;
};

struct EvalReport {
  std::vector<ClassReport> classes;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  double accuracy = 0.0;
  bool has_accuracy = false;
  int fold = -1;  // -1: pooled over folds

  nlohmann::json to_json() const;
  std::string table() const;  // aligned text table
};

EvalReport classification_report(const std::vector<int>& truth,
                                 const std::vector<int>& predicted,
                                 const std::vector<std::string>& class_names);
// Positive-class metrics plus accuracy.
EvalReport binary_report(const std::vector<bool>& truth,
                         const std::vector<bool>& predicted);

// One candidate pair's assignment: the link decision and the specificity
// class of the specificity snippet.
struct JointItem {
  bool link = false;
  int label = 0;  // SpecificityLabel as int
};

// A true positive of class C is a pair where both sides assign link = yes
// and both specificity classes equal C.
EvalReport joint_eval(const std::vector<JointItem>& truth,
                      const std::vector<JointItem>& predicted);

struct KappaResult {
  double value = 0.0;
  bool defined = true;  // false when chance agreement is 1
};

KappaResult cohen_kappa(const std::vector<int>& a1, const std::vector<int>& a2);
// Agreement-weight matrix: 1 on the diagonal, off-diagonal partial credit.
// With the identity matrix this reduces to the unweighted kappa.
KappaResult weighted_kappa(const std::vector<int>& a1, const std::vector<int>& a2,
                           const Eigen::MatrixXd& weights);
// Linear weights over ordered classes: w_ij = 1 - |i-j| / (k-1).
Eigen::MatrixXd linear_agreement_weights(int k);

}  // namespace abspec
