#include "abspec/protocols.hpp"

#include <algorithm>

#include "abspec/errors.hpp"
#include "abspec/snippets.hpp"

namespace abspec {

namespace {

FoldMeans mean_of(const std::vector<EvalReport>& folds) {
  FoldMeans m;
  if (folds.empty()) return m;
  for (const EvalReport& r : folds) {
    m.macro_f1 += r.macro_f1;
    m.weighted_f1 += r.weighted_f1;
    m.accuracy += r.accuracy;
    m.has_accuracy = m.has_accuracy || r.has_accuracy;
  }
  double n = static_cast<double>(folds.size());
  m.macro_f1 /= n;
  m.weighted_f1 /= n;
  m.accuracy /= n;
  return m;
}

std::vector<std::vector<size_t>> make_folds(size_t n, const std::vector<int>& labels,
                                            int k, uint64_t seed, bool stratified) {
  return stratified ? stratified_kfold_split(labels, k, seed)
                    : kfold_split(n, k, seed);
}

const std::vector<std::string> kClassNames = {"Nonspecific", "Neutral", "Specific"};

}  // namespace

std::string default_aspect_for_text(const std::string& text, AspectMode mode) {
  auto spans = antibody_spans(text);
  if (spans.empty()) return "antibody";
  return aspect_surface(text, spans.front(), mode);
}

CrossValResult eval_task1(const std::vector<LabeledSnippet>& dataset,
                          const TrainConfig& config, int k, bool stratified) {
  std::vector<int> labels;
  for (const auto& ex : dataset) labels.push_back(static_cast<int>(ex.label));
  auto folds = make_folds(dataset.size(), labels, k, config.seed, stratified);

  CrossValResult result;
  std::vector<int> pooled_truth, pooled_pred;
  for (size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_test(dataset.size(), false);
    for (size_t i : folds[f]) in_test[i] = true;
    std::vector<LabeledSnippet> train;
    for (size_t i = 0; i < dataset.size(); ++i)
      if (!in_test[i]) train.push_back(dataset[i]);
    SpecificityModel model = train_specificity(train, config);
    std::vector<int> truth, pred;
    for (size_t i : folds[f]) {
      truth.push_back(static_cast<int>(dataset[i].label));
      pred.push_back(static_cast<int>(
          classify_text(model, dataset[i].text, dataset[i].aspect).label));
    }
    EvalReport report = classification_report(truth, pred, kClassNames);
    report.fold = static_cast<int>(f);
    result.folds.push_back(std::move(report));
    pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
  }
  result.pooled = classification_report(pooled_truth, pooled_pred, kClassNames);
  result.fold_means = mean_of(result.folds);
  return result;
}

CrossValResult eval_task2(const std::vector<LabeledPair>& dataset,
                          const TrainConfig& config, int k, bool stratified) {
  std::vector<int> labels;
  for (const auto& ex : dataset) labels.push_back(ex.link ? 1 : 0);
  auto folds = make_folds(dataset.size(), labels, k, config.seed, stratified);

  CrossValResult result;
  std::vector<bool> pooled_truth, pooled_pred;
  for (size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_test(dataset.size(), false);
    for (size_t i : folds[f]) in_test[i] = true;
    std::vector<LabeledPair> train;
    for (size_t i = 0; i < dataset.size(); ++i)
      if (!in_test[i]) train.push_back(dataset[i]);
    LinkModel model = train_link_model(train, config);
    std::vector<bool> truth, pred;
    for (size_t i : folds[f]) {
      truth.push_back(dataset[i].link);
      pred.push_back(
          classify_link(model, dataset[i].spec_text, dataset[i].rrid_text).yes);
    }
    EvalReport report = binary_report(truth, pred);
    report.fold = static_cast<int>(f);
    result.folds.push_back(std::move(report));
    pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
  }
  result.pooled = binary_report(pooled_truth, pooled_pred);
  result.fold_means = mean_of(result.folds);
  return result;
}

CrossValResult eval_joint(const std::vector<LabeledPair>& dataset,
                          const TrainConfig& config, int k, bool stratified) {
  for (const auto& ex : dataset)
    if (!ex.specificity)
      throw DataError("joint evaluation needs a specificity label on every pair");
  AspectMode mode = config.aspect_mode == "phrase" ? AspectMode::Phrase
                                                   : AspectMode::Token;

  std::vector<int> labels;
  for (const auto& ex : dataset)
    labels.push_back(static_cast<int>(*ex.specificity) * 2 + (ex.link ? 1 : 0));
  auto folds = make_folds(dataset.size(), labels, k, config.seed, stratified);

  CrossValResult result;
  std::vector<JointItem> pooled_truth, pooled_pred;
  for (size_t f = 0; f < folds.size(); ++f) {
    std::vector<bool> in_test(dataset.size(), false);
    for (size_t i : folds[f]) in_test[i] = true;
    std::vector<LabeledPair> train_pairs;
    std::vector<LabeledSnippet> train_snippets;
    for (size_t i = 0; i < dataset.size(); ++i) {
      if (in_test[i]) continue;
      train_pairs.push_back(dataset[i]);
      train_snippets.push_back({dataset[i].spec_text,
                                default_aspect_for_text(dataset[i].spec_text, mode),
                                *dataset[i].specificity});
    }
    SpecificityModel spec_model = train_specificity(train_snippets, config);
    LinkModel link_model = train_link_model(train_pairs, config);
    std::vector<JointItem> truth, pred;
    for (size_t i : folds[f]) {
      const LabeledPair& ex = dataset[i];
      truth.push_back({ex.link, static_cast<int>(*ex.specificity)});
      ClassifyResult cls = classify_text(
          spec_model, ex.spec_text, default_aspect_for_text(ex.spec_text, mode));
      LinkLabel link = classify_link(link_model, ex.spec_text, ex.rrid_text);
      pred.push_back({link.yes, static_cast<int>(cls.label)});
    }
    EvalReport report = joint_eval(truth, pred);
    report.fold = static_cast<int>(f);
    result.folds.push_back(std::move(report));
    pooled_truth.insert(pooled_truth.end(), truth.begin(), truth.end());
    pooled_pred.insert(pooled_pred.end(), pred.begin(), pred.end());
  }
  result.pooled = joint_eval(pooled_truth, pooled_pred);
  result.fold_means = mean_of(result.folds);
  return result;
}

}  // namespace abspec
