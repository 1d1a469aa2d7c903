#pragma once

#include <vector>

#include "abspec/dataset.hpp"
#include "abspec/linking.hpp"
#include "abspec/metrics.hpp"
#include "abspec/specificity.hpp"
#include "abspec/train_config.hpp"

namespace abspec {

struct FoldMeans {
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  bool has_accuracy = false;
};

// Per-fold reports plus two aggregate views: metrics pooled over all fold
// predictions, and the mean of the per-fold metrics. The two coincide only
// approximately; both are reported.
struct CrossValResult {
  std::vector<EvalReport> folds;
  EvalReport pooled;
  FoldMeans fold_means;
};

CrossValResult eval_task1(const std::vector<LabeledSnippet>& dataset,
                          const TrainConfig& config, int k, bool stratified = false);
CrossValResult eval_task2(const std::vector<LabeledPair>& dataset,
                          const TrainConfig& config, int k, bool stratified = false);
// Joins the per-fold task-1 and task-2 models over the labeled pairs; every
// pair needs its specificity label.
CrossValResult eval_joint(const std::vector<LabeledPair>& dataset,
                          const TrainConfig& config, int k, bool stratified = false);

// Aspect used when classifying a bare snippet text: the first antibody
// match per the configured mode, or the literal "antibody" fallback.
std::string default_aspect_for_text(const std::string& text, AspectMode mode);

}  // namespace abspec
