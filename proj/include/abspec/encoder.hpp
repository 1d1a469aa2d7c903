#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "abspec/autodiff.hpp"
#include "abspec/tokenizer.hpp"

namespace abspec {

// Hidden states for the composed input ([CLS], snippet, [SEP], aspect):
// (n + m + 2) rows of dimension d. m may be 0 when no aspect is supplied.
struct EncoderOutput {
  ad::Mat H;
  int n = 0;
  int m = 0;
  int d = 0;
  int layers = 0;
  bool truncated = false;
};

struct EncoderSlices {
  Eigen::RowVectorXd h0;  // sequence-level representation, row 0
  ad::Mat a;              // snippet rows 1..n
  ad::Mat b;              // aspect rows n+2..n+m+1
};

// Rows sliced exactly as the head math expects; no copies are shared.
EncoderSlices slice_outputs(const EncoderOutput& out);

class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;
  virtual EncoderOutput encode(const TokenSequence& snippet,
                               const TokenSequence& aspect) const = 0;
  virtual int dim() const = 0;
  virtual int max_len() const = 0;
  virtual std::string id() const = 0;
};

struct MiniEncoderConfig {
  int dim = 64;
  int layers = 2;
  int heads = 2;
  int ffn_dim = 128;
  int max_len = 128;
};

// Desk-scale trainable transformer: learned word and position embeddings,
// post-norm layers, GELU feed-forward. Inference runs the same graph code
// as training; parameters are autodiff leaves.
class MiniEncoder : public EncoderBackend {
 public:
  MiniEncoder(MiniEncoderConfig cfg, Vocab vocab, uint64_t seed);

  struct Composed {
    std::vector<int> ids;
    int n = 0;
    int m = 0;
    bool truncated = false;
  };
  // [CLS] + snippet + [SEP] + aspect. Over-length inputs lose snippet tail
  // tokens, never aspect tokens.
  Composed compose(const TokenSequence& snippet, const TokenSequence& aspect) const;

  // Full hidden-state graph for a composed id sequence, length x dim.
  ad::Var forward(const std::vector<int>& ids) const;

  EncoderOutput encode(const TokenSequence& snippet,
                       const TokenSequence& aspect) const override;
  int dim() const override { return cfg_.dim; }
  int max_len() const override { return cfg_.max_len; }
  std::string id() const override { return "mini"; }

  std::vector<ad::Var>& params() { return params_; }
  const std::vector<ad::Var>& params() const { return params_; }
  Vocab& vocab() { return vocab_; }
  const Vocab& vocab() const { return vocab_; }
  const MiniEncoderConfig& config() const { return cfg_; }

  void set_all_zero();  // zero every parameter (tests)

  nlohmann::json to_json() const;
  static std::unique_ptr<MiniEncoder> from_json(const nlohmann::json& j);

 private:
  struct Layer {
    ad::Var wq, bq, wk, bk, wv, bv, wo, bo;
    ad::Var w1, b1, w2, b2;
    ad::Var ln1_g, ln1_b, ln2_g, ln2_b;
  };

  MiniEncoderConfig cfg_;
  Vocab vocab_;
  ad::Var tok_emb_;  // vocab x d
  ad::Var pos_emb_;  // max_len x d
  std::vector<Layer> layers_;
  std::vector<ad::Var> params_;  // flat view over everything above

  void register_params();
};

// Adapter slot for pretrained encoders: a callable taking the two token-id
// arrays and returning the full ((n+m+2) x d) hidden matrix.
class CallbackEncoder : public EncoderBackend {
 public:
  using Fn = std::function<ad::Mat(const std::vector<int>&, const std::vector<int>&)>;
  CallbackEncoder(Fn fn, int dim, int max_len, std::string id)
      : fn_(std::move(fn)), dim_(dim), max_len_(max_len), id_(std::move(id)) {}

  EncoderOutput encode(const TokenSequence& snippet,
                       const TokenSequence& aspect) const override;
  int dim() const override { return dim_; }
  int max_len() const override { return max_len_; }
  std::string id() const override { return id_; }

 private:
  Fn fn_;
  int dim_;
  int max_len_;
  std::string id_;
};

}  // namespace abspec
