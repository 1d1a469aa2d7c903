#include "abspec/encoder.hpp"

#include <cmath>

#include "abspec/errors.hpp"
#include "abspec/json_mat.hpp"
#include "abspec/utils.hpp"

namespace abspec {

using ad::Mat;
using ad::Var;

EncoderSlices slice_outputs(const EncoderOutput& out) {
  if (out.H.rows() != out.n + out.m + 2)
    throw DataError("encoder output rows do not match n + m + 2");
  EncoderSlices s;
  s.h0 = out.H.row(0);
  s.a = out.H.middleRows(1, out.n);
  s.b = out.m > 0 ? Mat(out.H.middleRows(out.n + 2, out.m)) : Mat(0, out.H.cols());
  return s;
}

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double stddev) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, stddev);
  return m;
}

Var gelu(const Var& x) {
  // tanh approximation; smooth everywhere, which keeps finite-difference
  // gradient checks well behaved
  Var x3 = ad::cmul(ad::cmul(x, x), x);
  Var inner = ad::scale(ad::add(x, ad::scale(x3, 0.044715)), 0.7978845608028654);
  return ad::cmul(ad::scale(x, 0.5), ad::add_scalar(ad::tanh_v(inner), 1.0));
}

}  // namespace

MiniEncoder::MiniEncoder(MiniEncoderConfig cfg, Vocab vocab, uint64_t seed)
    : cfg_(cfg), vocab_(std::move(vocab)) {
  if (cfg_.dim % cfg_.heads != 0)
    throw DataError("encoder dim must be divisible by the head count");
  Rng rng(seed);
  const double init = 0.05;
  const int d = cfg_.dim;
  tok_emb_ = Var::param(random_mat(rng, vocab_.size(), d, init));
  pos_emb_ = Var::param(random_mat(rng, cfg_.max_len, d, init));
  for (int l = 0; l < cfg_.layers; ++l) {
    Layer layer;
    layer.wq = Var::param(random_mat(rng, d, d, init));
    layer.bq = Var::param(Mat::Zero(1, d));
    layer.wk = Var::param(random_mat(rng, d, d, init));
    layer.bk = Var::param(Mat::Zero(1, d));
    layer.wv = Var::param(random_mat(rng, d, d, init));
    layer.bv = Var::param(Mat::Zero(1, d));
    layer.wo = Var::param(random_mat(rng, d, d, init));
    layer.bo = Var::param(Mat::Zero(1, d));
    layer.w1 = Var::param(random_mat(rng, d, cfg_.ffn_dim, init));
    layer.b1 = Var::param(Mat::Zero(1, cfg_.ffn_dim));
    layer.w2 = Var::param(random_mat(rng, cfg_.ffn_dim, d, init));
    layer.b2 = Var::param(Mat::Zero(1, d));
    layer.ln1_g = Var::param(Mat::Ones(1, d));
    layer.ln1_b = Var::param(Mat::Zero(1, d));
    layer.ln2_g = Var::param(Mat::Ones(1, d));
    layer.ln2_b = Var::param(Mat::Zero(1, d));
    layers_.push_back(std::move(layer));
  }
  register_params();
}

void MiniEncoder::register_params() {
  params_.clear();
  params_.push_back(tok_emb_);
  params_.push_back(pos_emb_);
  for (Layer& l : layers_) {
    for (Var* v : {&l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv, &l.wo, &l.bo,
                   &l.w1, &l.b1, &l.w2, &l.b2, &l.ln1_g, &l.ln1_b, &l.ln2_g,
                   &l.ln2_b})
      params_.push_back(*v);
  }
}

MiniEncoder::Composed MiniEncoder::compose(const TokenSequence& snippet,
                                           const TokenSequence& aspect) const {
  Composed c;
  c.m = static_cast<int>(aspect.size());
  int budget = cfg_.max_len - 2 - c.m;
  if (budget < 1) throw DataError("aspect does not fit the encoder length limit");
  c.n = static_cast<int>(snippet.size());
  if (c.n > budget) {
    c.n = budget;  // drop snippet tail, keep the aspect whole
    c.truncated = true;
  }
  if (c.n == 0) throw DataError("empty snippet token sequence");
  c.ids.reserve(static_cast<size_t>(c.n + c.m + 2));
  c.ids.push_back(Vocab::kCls);
  c.ids.insert(c.ids.end(), snippet.ids.begin(), snippet.ids.begin() + c.n);
  c.ids.push_back(Vocab::kSep);
  c.ids.insert(c.ids.end(), aspect.ids.begin(), aspect.ids.end());
  return c;
}

Var MiniEncoder::forward(const std::vector<int>& ids) const {
  const int T = static_cast<int>(ids.size());
  if (T > cfg_.max_len) throw DataError("sequence exceeds encoder max length");
  const int d = cfg_.dim;
  const int dh = d / cfg_.heads;
  Var x = ad::add(ad::gather_rows(tok_emb_, ids), ad::slice_rows(pos_emb_, 0, T));
  for (const Layer& l : layers_) {
    Var q = ad::add_rowvec(ad::matmul(x, l.wq), l.bq);
    Var k = ad::add_rowvec(ad::matmul(x, l.wk), l.bk);
    Var v = ad::add_rowvec(ad::matmul(x, l.wv), l.bv);
    Var ctx;
    for (int h = 0; h < cfg_.heads; ++h) {
      Var qh = ad::slice_cols(q, h * dh, dh);
      Var kh = ad::slice_cols(k, h * dh, dh);
      Var vh = ad::slice_cols(v, h * dh, dh);
      Var scores = ad::scale(ad::matmul(qh, ad::transpose(kh)),
                             1.0 / std::sqrt(static_cast<double>(dh)));
      Var ctx_h = ad::matmul(ad::row_softmax(scores), vh);
      ctx = h == 0 ? ctx_h : ad::hcat(ctx, ctx_h);
    }
    Var attn_out = ad::add_rowvec(ad::matmul(ctx, l.wo), l.bo);
    x = ad::layer_norm_rows(ad::add(x, attn_out), l.ln1_g, l.ln1_b);
    Var hidden = gelu(ad::add_rowvec(ad::matmul(x, l.w1), l.b1));
    Var ffn_out = ad::add_rowvec(ad::matmul(hidden, l.w2), l.b2);
    x = ad::layer_norm_rows(ad::add(x, ffn_out), l.ln2_g, l.ln2_b);
  }
  return x;
}

EncoderOutput MiniEncoder::encode(const TokenSequence& snippet,
                                  const TokenSequence& aspect) const {
  Composed c = compose(snippet, aspect);
  EncoderOutput out;
  out.H = forward(c.ids).value();
  out.n = c.n;
  out.m = c.m;
  out.d = cfg_.dim;
  out.layers = cfg_.layers;
  out.truncated = c.truncated;
  if (!out.H.allFinite()) throw DataError("encoder produced non-finite values");
  return out;
}

void MiniEncoder::set_all_zero() {
  for (Var& p : params_) p.mutable_value().setZero();
}

nlohmann::json MiniEncoder::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "mini_transformer";
  j["config"] = {{"dim", cfg_.dim},
                 {"layers", cfg_.layers},
                 {"heads", cfg_.heads},
                 {"ffn_dim", cfg_.ffn_dim},
                 {"max_len", cfg_.max_len}};
  j["vocab"] = vocab_.to_json();
  j["tok_emb"] = mat_to_json(tok_emb_.value());
  j["pos_emb"] = mat_to_json(pos_emb_.value());
  j["layer_params"] = nlohmann::json::array();
  for (const Layer& l : layers_) {
    j["layer_params"].push_back({
        {"wq", mat_to_json(l.wq.value())}, {"bq", mat_to_json(l.bq.value())},
        {"wk", mat_to_json(l.wk.value())}, {"bk", mat_to_json(l.bk.value())},
        {"wv", mat_to_json(l.wv.value())}, {"bv", mat_to_json(l.bv.value())},
        {"wo", mat_to_json(l.wo.value())}, {"bo", mat_to_json(l.bo.value())},
        {"w1", mat_to_json(l.w1.value())}, {"b1", mat_to_json(l.b1.value())},
        {"w2", mat_to_json(l.w2.value())}, {"b2", mat_to_json(l.b2.value())},
        {"ln1_g", mat_to_json(l.ln1_g.value())}, {"ln1_b", mat_to_json(l.ln1_b.value())},
        {"ln2_g", mat_to_json(l.ln2_g.value())}, {"ln2_b", mat_to_json(l.ln2_b.value())},
    });
  }
  return j;
}

std::unique_ptr<MiniEncoder> MiniEncoder::from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "mini_transformer")
    throw ParseError("encoder archive kind is not mini_transformer");
  if (j.value("format_version", 0) != 1)
    throw ParseError("unsupported encoder archive version");
  MiniEncoderConfig cfg;
  cfg.dim = j["config"]["dim"].get<int>();
  cfg.layers = j["config"]["layers"].get<int>();
  cfg.heads = j["config"]["heads"].get<int>();
  cfg.ffn_dim = j["config"]["ffn_dim"].get<int>();
  cfg.max_len = j["config"]["max_len"].get<int>();
  auto enc = std::make_unique<MiniEncoder>(cfg, Vocab::from_json(j["vocab"]), 0);
  enc->tok_emb_.mutable_value() = mat_from_json(j["tok_emb"]);
  enc->pos_emb_.mutable_value() = mat_from_json(j["pos_emb"]);
  const auto& lp = j["layer_params"];
  if (static_cast<int>(lp.size()) != cfg.layers)
    throw ParseError("encoder archive layer count mismatch");
  for (int l = 0; l < cfg.layers; ++l) {
    Layer& layer = enc->layers_[static_cast<size_t>(l)];
    layer.wq.mutable_value() = mat_from_json(lp[l]["wq"]);
    layer.bq.mutable_value() = mat_from_json(lp[l]["bq"]);
    layer.wk.mutable_value() = mat_from_json(lp[l]["wk"]);
    layer.bk.mutable_value() = mat_from_json(lp[l]["bk"]);
    layer.wv.mutable_value() = mat_from_json(lp[l]["wv"]);
    layer.bv.mutable_value() = mat_from_json(lp[l]["bv"]);
    layer.wo.mutable_value() = mat_from_json(lp[l]["wo"]);
    layer.bo.mutable_value() = mat_from_json(lp[l]["bo"]);
    layer.w1.mutable_value() = mat_from_json(lp[l]["w1"]);
    layer.b1.mutable_value() = mat_from_json(lp[l]["b1"]);
    layer.w2.mutable_value() = mat_from_json(lp[l]["w2"]);
    layer.b2.mutable_value() = mat_from_json(lp[l]["b2"]);
    layer.ln1_g.mutable_value() = mat_from_json(lp[l]["ln1_g"]);
    layer.ln1_b.mutable_value() = mat_from_json(lp[l]["ln1_b"]);
    layer.ln2_g.mutable_value() = mat_from_json(lp[l]["ln2_g"]);
    layer.ln2_b.mutable_value() = mat_from_json(lp[l]["ln2_b"]);
  }
  return enc;
}

EncoderOutput CallbackEncoder::encode(const TokenSequence& snippet,
                                      const TokenSequence& aspect) const {
  EncoderOutput out;
  out.n = static_cast<int>(snippet.size());
  out.m = static_cast<int>(aspect.size());
  int budget = max_len_ - 2 - out.m;
  if (budget < 1) throw DataError("aspect does not fit the encoder length limit");
  std::vector<int> snippet_ids = snippet.ids;
  if (out.n > budget) {
    snippet_ids.resize(static_cast<size_t>(budget));
    out.n = budget;
    out.truncated = true;
  }
  out.H = fn_(snippet_ids, aspect.ids);
  out.d = dim_;
  out.layers = 0;
  if (out.H.rows() != out.n + out.m + 2 || out.H.cols() != dim_)
    throw DataError("adapter returned a matrix of the wrong shape");
  if (!out.H.allFinite()) throw DataError("adapter returned non-finite values");
  return out;
}

}  // namespace abspec
