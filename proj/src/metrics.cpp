#include "abspec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include "abspec/errors.hpp"
#include "abspec/utils.hpp"

namespace abspec {

Prf1 prf1(const ClassCounts& counts) {
  Prf1 out;
  if (counts.tp + counts.fp > 0) {
    out.precision = static_cast<double>(counts.tp) /
                    static_cast<double>(counts.tp + counts.fp);
  } else {
    out.precision = 0.0;
    out.precision_defined = false;
  }
  if (counts.tp + counts.fn > 0) {
    out.recall = static_cast<double>(counts.tp) /
                 static_cast<double>(counts.tp + counts.fn);
  } else {
    out.recall = 0.0;
    out.recall_defined = false;
  }
  double pr = out.precision + out.recall;
  out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

Aggregates aggregate(const std::vector<double>& f1s, const std::vector<long>& supports) {
  if (f1s.empty() || f1s.size() != supports.size())
    throw DataError("aggregate: need matching, non-empty f1 and support lists");
  Aggregates out;
  double total_support = 0.0;
  for (size_t i = 0; i < f1s.size(); ++i) {
    out.macro_f1 += f1s[i];
    out.weighted_f1 += f1s[i] * static_cast<double>(supports[i]);
    total_support += static_cast<double>(supports[i]);
  }
  out.macro_f1 /= static_cast<double>(f1s.size());
  if (total_support <= 0.0) throw DataError("aggregate: total support is zero");
  out.weighted_f1 /= total_support;
  return out;
}

std::vector<std::vector<size_t>> kfold_split(size_t n, int k, uint64_t seed) {
  if (k < 2) throw DataError("kfold: k must be at least 2");
  if (static_cast<size_t>(k) > n) throw DataError("kfold: k exceeds the dataset size");
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  for (size_t i = 0; i < n; ++i) folds[i % static_cast<size_t>(k)].push_back(idx[i]);
  return folds;
}

std::vector<std::vector<size_t>> stratified_kfold_split(const std::vector<int>& labels,
                                                        int k, uint64_t seed) {
  if (k < 2) throw DataError("kfold: k must be at least 2");
  if (static_cast<size_t>(k) > labels.size())
    throw DataError("kfold: k exceeds the dataset size");
  std::map<int, std::vector<size_t>> by_label;
  for (size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  size_t next = 0;
  for (auto& [label, idx] : by_label) {
    rng.shuffle(idx);
    for (size_t i : idx) folds[next++ % static_cast<size_t>(k)].push_back(i);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

void finalize_report(EvalReport& report) {
  double macro_p = 0.0, macro_r = 0.0, macro_f = 0.0;
  double w_p = 0.0, w_r = 0.0, w_f = 0.0, total = 0.0;
  for (const ClassReport& c : report.classes) {
    macro_p += c.metrics.precision;
    macro_r += c.metrics.recall;
    macro_f += c.metrics.f1;
    w_p += c.metrics.precision * static_cast<double>(c.truth);
    w_r += c.metrics.recall * static_cast<double>(c.truth);
    w_f += c.metrics.f1 * static_cast<double>(c.truth);
    total += static_cast<double>(c.truth);
  }
  double n_classes = static_cast<double>(report.classes.size());
  report.macro_precision = macro_p / n_classes;
  report.macro_recall = macro_r / n_classes;
  report.macro_f1 = macro_f / n_classes;
  if (total > 0.0) {
    report.weighted_precision = w_p / total;
    report.weighted_recall = w_r / total;
    report.weighted_f1 = w_f / total;
  }
}

}  // namespace

EvalReport classification_report(const std::vector<int>& truth,
                                 const std::vector<int>& predicted,
                                 const std::vector<std::string>& class_names) {
  if (truth.size() != predicted.size())
    throw DataError("classification_report: size mismatch");
  const int k = static_cast<int>(class_names.size());
  EvalReport report;
  long agree = 0;
  for (int c = 0; c < k; ++c) {
    ClassReport cr;
    cr.name = class_names[static_cast<size_t>(c)];
    for (size_t i = 0; i < truth.size(); ++i) {
      bool t = truth[i] == c, p = predicted[i] == c;
      cr.truth += t;
      cr.predicted += p;
      if (t && p) cr.counts.tp++;
      else if (!t && p) cr.counts.fp++;
      else if (t && !p) cr.counts.fn++;
    }
    cr.metrics = prf1(cr.counts);
    report.classes.push_back(std::move(cr));
  }
  for (size_t i = 0; i < truth.size(); ++i) agree += truth[i] == predicted[i];
  report.accuracy = truth.empty() ? 0.0
                                  : static_cast<double>(agree) /
                                        static_cast<double>(truth.size());
  report.has_accuracy = true;
  finalize_report(report);
  return report;
}

EvalReport binary_report(const std::vector<bool>& truth,
                         const std::vector<bool>& predicted) {
  if (truth.size() != predicted.size())
    throw DataError("binary_report: size mismatch");
  EvalReport report;
  ClassReport yes;
  yes.name = "Yes";
  long agree = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    yes.truth += truth[i];
    yes.predicted += predicted[i];
    if (truth[i] && predicted[i]) yes.counts.tp++;
    else if (!truth[i] && predicted[i]) yes.counts.fp++;
    else if (truth[i] && !predicted[i]) yes.counts.fn++;
    agree += truth[i] == predicted[i];
  }
  yes.metrics = prf1(yes.counts);
  report.classes.push_back(std::move(yes));
  report.accuracy = truth.empty() ? 0.0
                                  : static_cast<double>(agree) /
                                        static_cast<double>(truth.size());
  report.has_accuracy = true;
  finalize_report(report);
  return report;
}

EvalReport joint_eval(const std::vector<JointItem>& truth,
                      const std::vector<JointItem>& predicted) {
  if (truth.size() != predicted.size())
    throw DataError("joint_eval: truth and predictions must index the same pairs");
  const std::vector<std::string> names = {"Nonspecific", "Neutral", "Specific"};
  EvalReport report;
  for (int c = 0; c < 3; ++c) {
    ClassReport cr;
    cr.name = names[static_cast<size_t>(c)];
    for (size_t i = 0; i < truth.size(); ++i) {
      bool in_truth = truth[i].link && truth[i].label == c;
      bool in_pred = predicted[i].link && predicted[i].label == c;
      cr.truth += in_truth;
      cr.predicted += in_pred;
      if (in_truth && in_pred) cr.counts.tp++;
      else if (in_pred) cr.counts.fp++;
      else if (in_truth) cr.counts.fn++;
    }
    cr.metrics = prf1(cr.counts);
    report.classes.push_back(std::move(cr));
  }
  finalize_report(report);
  return report;
}

namespace {

void check_label_inputs(const std::vector<int>& a1, const std::vector<int>& a2) {
  if (a1.size() != a2.size() || a1.empty())
    throw DataError("kappa: annotations must be non-empty and the same length");
  for (size_t i = 0; i < a1.size(); ++i)
    if (a1[i] < 0 || a2[i] < 0) throw DataError("kappa: labels must be non-negative");
}

}  // namespace

KappaResult cohen_kappa(const std::vector<int>& a1, const std::vector<int>& a2) {
  check_label_inputs(a1, a2);
  int k = 0;
  for (size_t i = 0; i < a1.size(); ++i) k = std::max({k, a1[i] + 1, a2[i] + 1});
  return weighted_kappa(a1, a2, Eigen::MatrixXd::Identity(k, k));
}

KappaResult weighted_kappa(const std::vector<int>& a1, const std::vector<int>& a2,
                           const Eigen::MatrixXd& weights) {
  check_label_inputs(a1, a2);
  const int k = static_cast<int>(weights.rows());
  if (weights.cols() != k) throw DataError("kappa: weight matrix must be square");
  const double n = static_cast<double>(a1.size());
  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd marg1 = Eigen::VectorXd::Zero(k), marg2 = Eigen::VectorXd::Zero(k);
  for (size_t i = 0; i < a1.size(); ++i) {
    if (a1[i] >= k || a2[i] >= k)
      throw DataError("kappa: label outside the weight matrix");
    observed(a1[i], a2[i]) += 1.0;
    marg1(a1[i]) += 1.0;
    marg2(a2[i]) += 1.0;
  }
  double po = (weights.array() * observed.array()).sum() / n;
  double pe = (weights.array() * (marg1 * marg2.transpose()).array()).sum() / (n * n);
  KappaResult out;
  if (std::abs(1.0 - pe) < 1e-12) {
    out.defined = false;
    out.value = 0.0;
    return out;
  }
  out.value = (po - pe) / (1.0 - pe);
  return out;
}

Eigen::MatrixXd linear_agreement_weights(int k) {
  if (k < 2) throw DataError("linear weights need at least two classes");
  Eigen::MatrixXd w(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      w(i, j) = 1.0 - static_cast<double>(std::abs(i - j)) /
                          static_cast<double>(k - 1);
  return w;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["classes"] = nlohmann::json::array();
  for (const ClassReport& c : classes) {
    j["classes"].push_back({
        {"class", c.name},
        {"truth", c.truth},
        {"predicted", c.predicted},
        {"tp", c.counts.tp},
        {"fp", c.counts.fp},
        {"fn", c.counts.fn},
        {"precision", c.metrics.precision},
        {"recall", c.metrics.recall},
        {"f1", c.metrics.f1},
        {"precision_defined", c.metrics.precision_defined},
        {"recall_defined", c.metrics.recall_defined},
    });
  }
  j["macro"] = {{"precision", macro_precision},
                {"recall", macro_recall},
                {"f1", macro_f1}};
  j["weighted"] = {{"precision", weighted_precision},
                   {"recall", weighted_recall},
                   {"f1", weighted_f1}};
  if (has_accuracy) j["accuracy"] = accuracy;
  if (fold >= 0) j["fold"] = fold;
  return j;
}

std::string EvalReport::table() const {
  std::ostringstream os;
  os << std::left << std::setw(14) << "Class" << std::right << std::setw(7)
     << "Truth" << std::setw(11) << "Predicted" << std::setw(11) << "Precision"
     << std::setw(8) << "Recall" << std::setw(8) << "F1" << "\n";
  os << std::string(59, '-') << "\n";
  long truth_total = 0, predicted_total = 0;
  os << std::fixed << std::setprecision(3);
  for (const ClassReport& c : classes) {
    truth_total += c.truth;
    predicted_total += c.predicted;
    os << std::left << std::setw(14) << c.name << std::right << std::setw(7)
       << c.truth << std::setw(11) << c.predicted << std::setw(11)
       << c.metrics.precision << std::setw(8) << c.metrics.recall << std::setw(8)
       << c.metrics.f1 << "\n";
  }
  os << std::left << std::setw(14) << "Total/Macro" << std::right << std::setw(7)
     << truth_total << std::setw(11) << predicted_total << std::setw(11)
     << macro_precision << std::setw(8) << macro_recall << std::setw(8) << macro_f1
     << "\n";
  os << std::left << std::setw(14) << "Weighted" << std::right << std::setw(7) << ""
     << std::setw(11) << "" << std::setw(11) << weighted_precision << std::setw(8)
     << weighted_recall << std::setw(8) << weighted_f1 << "\n";
  if (has_accuracy)
    os << std::left << std::setw(14) << "Accuracy" << std::right << std::setw(7)
       << "" << std::setw(11) << "" << std::setw(11) << "" << std::setw(8) << ""
       << std::setw(8) << accuracy << "\n";
  return os.str();
}

}  // namespace abspec
