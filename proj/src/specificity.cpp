#include "abspec/specificity.hpp"

#include <array>
#include <cmath>
#include <iostream>
#include <limits>

#include "abspec/aoa.hpp"
#include "abspec/errors.hpp"
#include "abspec/json_mat.hpp"
#include "abspec/optim.hpp"
#include "abspec/utils.hpp"

namespace abspec {

using ad::Mat;
using ad::Var;

std::string head_variant_name(HeadVariant v) {
  switch (v) {
    case HeadVariant::AOA: return "aoa";
    case HeadVariant::AOA_CLS: return "aoa_cls";
    case HeadVariant::ENC_ONLY: return "enc_only";
    case HeadVariant::ENC_SPC: return "enc_spc";
  }
  return "aoa_cls";
}

HeadVariant head_variant_from_name(const std::string& name) {
  std::string k = lowercase(name);
  if (k == "aoa") return HeadVariant::AOA;
  if (k == "aoa_cls") return HeadVariant::AOA_CLS;
  if (k == "enc_only") return HeadVariant::ENC_ONLY;
  if (k == "enc_spc") return HeadVariant::ENC_SPC;
  throw DataError("unknown head variant: " + name);
}

int SpecificityModel::head_input_dim() const {
  int d = backend->dim();
  return variant == HeadVariant::AOA_CLS ? 2 * d : d;
}

SpecificityModel make_specificity_model(std::shared_ptr<MiniEncoder> encoder,
                                        HeadVariant variant, double l2_weight,
                                        AspectMode mode) {
  SpecificityModel m;
  m.mini = encoder;
  m.backend = encoder;
  m.vocab = encoder->vocab();
  m.variant = variant;
  m.aspect_mode = mode;
  m.l2_weight = l2_weight;
  m.head_w = Var::param(Mat::Zero(m.head_input_dim(), 3));
  m.head_bias = Var::param(Mat::Zero(1, 3));
  return m;
}

std::string aspect_surface(const std::string& snippet_text, CharSpan span,
                           AspectMode mode) {
  auto [b, e] = span;
  if (b >= e || e > snippet_text.size())
    throw DataError("aspect span outside the snippet text");
  if (mode == AspectMode::Token) return snippet_text.substr(b, e - b);
  // phrase mode: include up to two tokens immediately before the match
  size_t start = b;
  for (int hops = 0; hops < 2; ++hops) {
    size_t ws = start;
    while (ws > 0 && std::isspace(static_cast<unsigned char>(snippet_text[ws - 1]))) --ws;
    if (ws == 0) { start = 0; break; }
    size_t tok = ws;
    while (tok > 0 && !std::isspace(static_cast<unsigned char>(snippet_text[tok - 1]))) --tok;
    start = tok;
  }
  return snippet_text.substr(start, e - start);
}

namespace {

Var aoa_pool_graph(const Var& a, const Var& b) {
  Var I = ad::matmul(a, ad::transpose(b));
  Var alpha = ad::col_softmax(I);
  Var beta = ad::row_softmax(I);
  Var beta_bar = ad::col_mean(beta);                       // 1 x m
  Var gamma = ad::matmul(alpha, ad::transpose(beta_bar));  // n x 1
  return ad::matmul(ad::transpose(gamma), a);              // 1 x d
}

}  // namespace

Var head_logits_graph(const Var& H, int n, int m, HeadVariant variant,
                      const Var& W, const Var& bias) {
  Var h0 = ad::slice_rows(H, 0, 1);
  Var repr;
  switch (variant) {
    case HeadVariant::AOA:
    case HeadVariant::AOA_CLS: {
      if (m < 1) throw DataError("aspect required for AOA head variants");
      Var a = ad::slice_rows(H, 1, n);
      Var b = ad::slice_rows(H, n + 2, m);
      Var r_aoa = aoa_pool_graph(a, b);
      repr = variant == HeadVariant::AOA ? r_aoa : ad::hcat(h0, r_aoa);
      break;
    }
    case HeadVariant::ENC_ONLY:
    case HeadVariant::ENC_SPC:
      repr = h0;
      break;
  }
  return ad::add_rowvec(ad::matmul(repr, W), bias);
}

namespace {

ClassifyResult classify_encoded(const SpecificityModel& model,
                                const EncoderOutput& out) {
  EncoderSlices s = slice_outputs(out);
  Eigen::VectorXd repr;
  switch (model.variant) {
    case HeadVariant::AOA: {
      absa::AoaAttention att = absa::aoa_attention(s.a, s.b);
      repr = absa::aoa_pool(s.a, att.gamma);
      break;
    }
    case HeadVariant::AOA_CLS: {
      absa::AoaAttention att = absa::aoa_attention(s.a, s.b);
      repr = absa::cls_concat(s.h0.transpose(), absa::aoa_pool(s.a, att.gamma));
      break;
    }
    case HeadVariant::ENC_ONLY:
    case HeadVariant::ENC_SPC:
      repr = s.h0.transpose();
      break;
  }
  Eigen::RowVector3d logits =
      repr.transpose() * model.head_w.value() + model.head_bias.value();
  double mx = logits.maxCoeff();
  Eigen::RowVector3d e = (logits.array() - mx).exp().matrix();
  ClassifyResult result;
  result.probs = (e / e.sum()).transpose();
  result.truncated = out.truncated;
  // argmax with ties resolved toward Nonspecific, then Neutral
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (result.probs(k) > result.probs(best)) best = k;
  result.label = static_cast<SpecificityLabel>(best);
  return result;
}

}  // namespace

ClassifyResult classify_text(const SpecificityModel& model, const std::string& text,
                             const std::string& aspect) {
  TokenSequence snippet_seq = tokenize(text, model.vocab);
  TokenSequence aspect_seq;
  if (model.variant != HeadVariant::ENC_ONLY) {
    aspect_seq = tokenize(aspect, model.vocab);
    if (aspect_seq.empty()) throw DataError("aspect required for this head variant");
  }
  if (snippet_seq.empty()) throw DataError("empty snippet text");
  return classify_encoded(model, model.backend->encode(snippet_seq, aspect_seq));
}

ClassifyResult classify_specificity(const SpecificityModel& model,
                                    const SpecificitySnippet& snippet,
                                    CharSpan aspect_span) {
  std::string text = snippet.text();
  return classify_text(model, text,
                       aspect_surface(text, aspect_span, model.aspect_mode));
}

namespace {

struct PreparedExample {
  std::vector<int> ids;
  int n = 0;
  int m = 0;
  int target = 0;
};

double dataset_loss(const std::vector<PreparedExample>& examples,
                    const std::vector<size_t>& idx, const SpecificityModel& model) {
  double total = 0.0;
  for (size_t i : idx) {
    const PreparedExample& ex = examples[i];
    Var H = model.mini->forward(ex.ids);
    Var loss = ad::softmax_xent(
        head_logits_graph(H, ex.n, ex.m, model.variant, model.head_w, model.head_bias),
        ex.target);
    total += loss.value()(0, 0);
  }
  return total / static_cast<double>(idx.size());
}

}  // namespace

SpecificityModel train_specificity(const std::vector<LabeledSnippet>& dataset,
                                   const TrainConfig& config, TrainStats* stats) {
  if (dataset.empty()) throw DataError("training dataset is empty");
  if (config.encoder != "mini")
    throw DataError("train_specificity only trains the bundled mini encoder; "
                    "pretrained backends are frozen adapters");

  HeadVariant variant = head_variant_from_name(config.head_variant);
  AspectMode mode = config.aspect_mode == "phrase" ? AspectMode::Phrase
                                                   : AspectMode::Token;

  Vocab vocab;
  for (const auto& ex : dataset) {
    tokenize_grow(ex.text, vocab);
    tokenize_grow(ex.aspect, vocab);
  }
  MiniEncoderConfig enc_cfg{config.dim, config.layers, config.heads,
                            config.ffn_dim, config.max_len};
  auto encoder = std::make_shared<MiniEncoder>(enc_cfg, vocab, config.seed);
  SpecificityModel model = make_specificity_model(encoder, variant,
                                                  config.l2_weight, mode);

  // class balance check
  std::array<long, 3> counts{0, 0, 0};
  for (const auto& ex : dataset) counts[static_cast<size_t>(ex.label)]++;
  std::array<double, 3> class_weight{1.0, 1.0, 1.0};
  for (int c = 0; c < 3; ++c) {
    if (counts[static_cast<size_t>(c)] == 0) {
      std::cerr << "warning: class " << label_name(static_cast<SpecificityLabel>(c))
                << " absent from the training data\n";
      class_weight[static_cast<size_t>(c)] = 0.0;
    } else if (config.class_weighted) {
      class_weight[static_cast<size_t>(c)] =
          static_cast<double>(dataset.size()) /
          (3.0 * static_cast<double>(counts[static_cast<size_t>(c)]));
    }
  }

  std::vector<PreparedExample> examples;
  for (const auto& ex : dataset) {
    TokenSequence snippet_seq = tokenize(ex.text, model.vocab);
    TokenSequence aspect_seq;
    if (variant != HeadVariant::ENC_ONLY) {
      aspect_seq = tokenize(ex.aspect, model.vocab);
      if (aspect_seq.empty())
        throw DataError("training example lacks an aspect for an aspect-taking head");
    }
    if (snippet_seq.empty()) throw DataError("training example with empty text");
    MiniEncoder::Composed c = encoder->compose(snippet_seq, aspect_seq);
    examples.push_back({std::move(c.ids), c.n, c.m,
                        static_cast<int>(ex.label)});
  }

  Rng rng(config.seed);
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  size_t n_val = static_cast<size_t>(config.val_fraction *
                                     static_cast<double>(order.size()));
  if (n_val >= order.size()) n_val = order.size() - 1;
  std::vector<size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());
  const std::vector<size_t>& eval_idx = n_val > 0 ? val_idx : train_idx;

  std::vector<Var> trainable = {model.head_w, model.head_bias};
  if (config.train_encoder)
    for (Var& p : encoder->params()) trainable.push_back(p);

  std::unique_ptr<Adam> adam;
  std::unique_ptr<Sgd> sgd;
  if (config.optimizer == "sgd") sgd = std::make_unique<Sgd>(config.lr);
  else adam = std::make_unique<Adam>(config.lr);

  double best_metric = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  std::vector<Mat> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (const Var& p : trainable) best_params.push_back(p.value());
  };
  snapshot();

  const int batch_size = std::max(1, config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train_idx);
    for (size_t start = 0; start < train_idx.size();
         start += static_cast<size_t>(batch_size)) {
      size_t stop = std::min(train_idx.size(), start + static_cast<size_t>(batch_size));
      zero_grads(trainable);
      std::vector<Var> losses;
      for (size_t k = start; k < stop; ++k) {
        const PreparedExample& ex = examples[train_idx[k]];
        Var H = encoder->forward(ex.ids);
        if (!config.train_encoder) H = Var::constant(H.value());
        Var logits = head_logits_graph(H, ex.n, ex.m, variant, model.head_w,
                                       model.head_bias);
        losses.push_back(ad::softmax_xent(logits, ex.target,
                                          class_weight[static_cast<size_t>(ex.target)]));
      }
      Var loss = ad::scale(ad::sum_vars(losses),
                           1.0 / static_cast<double>(losses.size()));
      if (config.l2_weight > 0.0) {
        Var reg = ad::sum_all(ad::cmul(model.head_w, model.head_w));
        if (config.l2_scope == "all")
          for (Var& p : encoder->params())
            reg = ad::add(reg, ad::sum_all(ad::cmul(p, p)));
        loss = ad::add(loss, ad::scale(reg, config.l2_weight));
      }
      ad::backward(loss);
      if (sgd) sgd->step(trainable);
      else adam->step(trainable);
    }
    double metric = dataset_loss(examples, eval_idx, model);
    if (stats) stats->epoch_losses.push_back(metric);
    if (metric < best_metric) {
      best_metric = metric;
      best_epoch = epoch;
      snapshot();
    }
  }
  for (size_t i = 0; i < trainable.size(); ++i)
    trainable[i].mutable_value() = best_params[i];
  if (stats) {
    stats->best_epoch = best_epoch;
    stats->best_metric = best_metric;
  }
  return model;
}

nlohmann::json specificity_model_to_json(const SpecificityModel& model) {
  if (!model.mini)
    throw DataError("only models over the bundled mini encoder are serializable");
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "specificity_model";
  j["head_variant"] = head_variant_name(model.variant);
  j["aspect_mode"] = model.aspect_mode == AspectMode::Phrase ? "phrase" : "token";
  j["l2_weight"] = model.l2_weight;
  j["head_w"] = mat_to_json(model.head_w.value());
  j["head_bias"] = mat_to_json(model.head_bias.value());
  j["encoder"] = model.mini->to_json();
  return j;
}

SpecificityModel specificity_model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "specificity_model")
    throw ParseError("archive kind is not specificity_model");
  if (j.value("format_version", 0) != 1)
    throw ParseError("unsupported specificity model archive version");
  std::shared_ptr<MiniEncoder> encoder = MiniEncoder::from_json(j["encoder"]);
  SpecificityModel model = make_specificity_model(
      encoder, head_variant_from_name(j["head_variant"].get<std::string>()),
      j.value("l2_weight", 0.0),
      j.value("aspect_mode", "token") == "phrase" ? AspectMode::Phrase
                                                  : AspectMode::Token);
  model.head_w.mutable_value() = mat_from_json(j["head_w"]);
  model.head_bias.mutable_value() = mat_from_json(j["head_bias"]);
  if (model.head_w.value().rows() != model.head_input_dim())
    throw ParseError("head weight shape does not match the head variant");
  return model;
}

void save_specificity_model(const SpecificityModel& model, const std::string& path) {
  write_file(path, specificity_model_to_json(model).dump());
}

SpecificityModel load_specificity_model(const std::string& path) {
  return specificity_model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace abspec
