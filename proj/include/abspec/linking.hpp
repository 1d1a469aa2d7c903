#pragma once

#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "abspec/dataset.hpp"
#include "abspec/encoder.hpp"
#include "abspec/snippets.hpp"
#include "abspec/train_config.hpp"

namespace abspec {

// Jaro similarity (half-window matching, transposition adjusted) plus the
// Winkler boost: up to 4 characters of common prefix scaled by 0.1.
// Conventions: both strings empty -> 1.0, exactly one empty -> 0.0.
double jaro_winkler(const std::string& s1, const std::string& s2);

// Lowercased common-word dictionary for the overlap baseline.
class WordList {
 public:
  WordList() = default;
  explicit WordList(std::vector<std::string> words);
  static WordList load(const std::string& path);  // one word per line, UTF-8

  bool contains(const std::string& word) const { return set_.count(word) > 0; }
  size_t size() const { return set_.size(); }
  std::vector<std::string> sorted_words() const;

 private:
  std::unordered_set<std::string> set_;
};

enum class LinkVariant { PairSpc, OverlapBaseline, Siamese };
std::string link_variant_name(LinkVariant v);
LinkVariant link_variant_from_name(const std::string& name);

enum class DistanceKind { Manhattan, Euclidean };

struct LinkLabel {
  bool yes = false;
  double score = 0.0;  // probability or similarity in [0, 1]
  bool truncated = false;
};

// Shared BiLSTM tower of the Siamese variant; both snippets run through the
// same parameters.
struct SiameseTower {
  Vocab vocab;
  int emb_dim = 32;
  int hidden = 32;
  ad::Var emb;                    // vocab x emb_dim
  ad::Var wx_f, wh_f, bias_f;     // forward LSTM
  ad::Var wx_b, wh_b, bias_b;     // backward LSTM
  std::vector<ad::Var> params;
};

struct LinkModel {
  LinkVariant variant = LinkVariant::OverlapBaseline;
  double threshold = 1.0;  // overlap: Jaro-Winkler match threshold

  // overlap baseline
  std::shared_ptr<WordList> dictionary;

  // pair classifier over the shared encoder
  std::shared_ptr<MiniEncoder> encoder;
  Vocab vocab;
  ad::Var head_w;     // d x 1
  ad::Var head_bias;  // 1 x 1

  // siamese
  std::shared_ptr<SiameseTower> tower;
  DistanceKind distance = DistanceKind::Manhattan;
};

LinkModel make_overlap_model(std::shared_ptr<WordList> dictionary, double threshold);
LinkModel make_pair_spc_model(std::shared_ptr<MiniEncoder> encoder);
LinkModel make_siamese_model(std::shared_ptr<SiameseTower> tower, DistanceKind distance);
std::shared_ptr<SiameseTower> make_siamese_tower(Vocab vocab, int emb_dim,
                                                 int hidden, uint64_t seed);

// Content tokens considered by the overlap baseline: lowercased, outer
// punctuation stripped; dictionary words (unless digit-bearing), pure
// punctuation and RRID tokens removed; de-duplicated.
std::vector<std::string> overlap_candidate_tokens(const std::string& text,
                                                  const WordList& dictionary);
int overlap_match_count(const std::string& text1, const std::string& text2,
                        const WordList& dictionary, double threshold);

LinkLabel classify_link(const LinkModel& model, const std::string& spec_text,
                        const std::string& rrid_text);
LinkLabel classify_link_pair(const LinkModel& model, const CandidatePair& pair);

// Graph builders shared with training and the gradient checks.
ad::Var pair_logit_graph(const ad::Var& H, const ad::Var& W, const ad::Var& bias);
ad::Var siamese_encode_graph(const SiameseTower& tower, const std::vector<int>& ids);
ad::Var siamese_score_graph(const ad::Var& u, const ad::Var& v, DistanceKind distance);

struct LinkTrainStats {
  int best_epoch = -1;
  double best_metric = 0.0;
  std::vector<double> epoch_losses;
};

// Binary cross entropy for the learned variants; the overlap baseline has no
// parameters and is returned as configured.
LinkModel train_link_model(const std::vector<LabeledPair>& dataset,
                           const TrainConfig& config,
                           LinkTrainStats* stats = nullptr);

nlohmann::json link_model_to_json(const LinkModel& model);
LinkModel link_model_from_json(const nlohmann::json& j);
void save_link_model(const LinkModel& model, const std::string& path);
LinkModel load_link_model(const std::string& path);

}  // namespace abspec
