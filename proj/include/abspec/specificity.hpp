#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "abspec/dataset.hpp"
#include "abspec/encoder.hpp"
#include "abspec/snippets.hpp"
#include "abspec/train_config.hpp"

namespace abspec {

enum class HeadVariant { AOA, AOA_CLS, ENC_ONLY, ENC_SPC };
std::string head_variant_name(HeadVariant v);
HeadVariant head_variant_from_name(const std::string& name);

// Whether the aspect fed to the classifier is the matched antibody token or
// a short phrase around it (e.g. "the 6E10 antibody").
enum class AspectMode { Token, Phrase };

struct ClassifyResult {
  SpecificityLabel label = SpecificityLabel::Neutral;
  Eigen::Vector3d probs = Eigen::Vector3d::Zero();
  bool truncated = false;
};

struct SpecificityModel {
  std::shared_ptr<EncoderBackend> backend;
  std::shared_ptr<MiniEncoder> mini;  // non-null when backend is the bundled encoder
  Vocab vocab;                        // frozen copy of the training vocabulary
  HeadVariant variant = HeadVariant::AOA_CLS;
  AspectMode aspect_mode = AspectMode::Token;
  ad::Var head_w;     // head_input_dim x 3
  ad::Var head_bias;  // 1 x 3
  double l2_weight = 0.0;

  int head_input_dim() const;
};

// Zero-initialized head over the given encoder (uniform predictions until
// trained).
SpecificityModel make_specificity_model(std::shared_ptr<MiniEncoder> encoder,
                                        HeadVariant variant, double l2_weight,
                                        AspectMode mode);

std::string aspect_surface(const std::string& snippet_text, CharSpan span,
                           AspectMode mode);

ClassifyResult classify_text(const SpecificityModel& model, const std::string& text,
                             const std::string& aspect);
// Runs on the aspect named by `aspect_span` (a span into snippet.text()).
ClassifyResult classify_specificity(const SpecificityModel& model,
                                    const SpecificitySnippet& snippet,
                                    CharSpan aspect_span);

// Shared by training and gradient checks: 1x3 logits from the hidden matrix.
ad::Var head_logits_graph(const ad::Var& H, int n, int m, HeadVariant variant,
                          const ad::Var& W, const ad::Var& bias);

struct TrainStats {
  int best_epoch = -1;
  double best_metric = 0.0;
  std::vector<double> epoch_losses;
};

// Cross-entropy with l2 regularization on the head weights (optionally all
// parameters); returns the parameter state of the best epoch. Deterministic
// for a fixed seed.
SpecificityModel train_specificity(const std::vector<LabeledSnippet>& dataset,
                                   const TrainConfig& config,
                                   TrainStats* stats = nullptr);

nlohmann::json specificity_model_to_json(const SpecificityModel& model);
SpecificityModel specificity_model_from_json(const nlohmann::json& j);
void save_specificity_model(const SpecificityModel& model, const std::string& path);
SpecificityModel load_specificity_model(const std::string& path);

}  // namespace abspec
