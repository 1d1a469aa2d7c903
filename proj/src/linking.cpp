#include "abspec/linking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

#include "abspec/errors.hpp"
#include "abspec/json_mat.hpp"
#include "abspec/optim.hpp"
#include "abspec/utils.hpp"

namespace abspec {

using ad::Mat;
using ad::Var;

double jaro_winkler(const std::string& s1, const std::string& s2) {
  const size_t len1 = s1.size(), len2 = s2.size();
  if (len1 == 0 && len2 == 0) return 1.0;
  if (len1 == 0 || len2 == 0) return 0.0;

  const size_t longer = std::max(len1, len2);
  const size_t window = longer / 2 > 0 ? longer / 2 - 1 : 0;

  std::vector<bool> used1(len1, false), used2(len2, false);
  size_t matches = 0;
  for (size_t i = 0; i < len1; ++i) {
    size_t lo = i > window ? i - window : 0;
    size_t hi = std::min(len2, i + window + 1);
    for (size_t j = lo; j < hi; ++j) {
      if (!used2[j] && s1[i] == s2[j]) {
        used1[i] = used2[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  size_t transpositions = 0;
  size_t k = 0;
  for (size_t i = 0; i < len1; ++i) {
    if (!used1[i]) continue;
    while (!used2[k]) ++k;
    if (s1[i] != s2[k]) ++transpositions;
    ++k;
  }
  transpositions /= 2;

  const double m = static_cast<double>(matches);
  const double jaro = (m / static_cast<double>(len1) + m / static_cast<double>(len2) +
                       (m - static_cast<double>(transpositions)) / m) /
                      3.0;

  size_t prefix = 0;
  while (prefix < std::min({len1, len2, static_cast<size_t>(4)}) &&
         s1[prefix] == s2[prefix])
    ++prefix;
  return jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro);
}

WordList::WordList(std::vector<std::string> words) {
  for (auto& w : words) set_.insert(lowercase(trim(w)));
  set_.erase("");
}

WordList WordList::load(const std::string& path) {
  return WordList(read_lines(path));
}

std::vector<std::string> WordList::sorted_words() const {
  std::vector<std::string> out(set_.begin(), set_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string link_variant_name(LinkVariant v) {
  switch (v) {
    case LinkVariant::PairSpc: return "pair_spc";
    case LinkVariant::OverlapBaseline: return "overlap";
    case LinkVariant::Siamese: return "siamese";
  }
  return "overlap";
}

LinkVariant link_variant_from_name(const std::string& name) {
  std::string k = lowercase(name);
  if (k == "pair_spc") return LinkVariant::PairSpc;
  if (k == "overlap" || k == "overlap_baseline") return LinkVariant::OverlapBaseline;
  if (k == "siamese") return LinkVariant::Siamese;
  throw DataError("unknown link variant: " + name);
}

LinkModel make_overlap_model(std::shared_ptr<WordList> dictionary, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw DataError("overlap threshold must lie in [0, 1]");
  LinkModel m;
  m.variant = LinkVariant::OverlapBaseline;
  m.dictionary = std::move(dictionary);
  m.threshold = threshold;
  if (!m.dictionary) throw DataError("overlap baseline needs a dictionary");
  return m;
}

LinkModel make_pair_spc_model(std::shared_ptr<MiniEncoder> encoder) {
  LinkModel m;
  m.variant = LinkVariant::PairSpc;
  m.encoder = std::move(encoder);
  m.vocab = m.encoder->vocab();
  m.head_w = Var::param(Mat::Zero(m.encoder->dim(), 1));
  m.head_bias = Var::param(Mat::Zero(1, 1));
  return m;
}

std::shared_ptr<SiameseTower> make_siamese_tower(Vocab vocab, int emb_dim,
                                                 int hidden, uint64_t seed) {
  auto tower = std::make_shared<SiameseTower>();
  tower->vocab = std::move(vocab);
  tower->emb_dim = emb_dim;
  tower->hidden = hidden;
  Rng rng(seed);
  auto randm = [&rng](Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 0.1);
    return m;
  };
  tower->emb = Var::param(randm(tower->vocab.size(), emb_dim));
  tower->wx_f = Var::param(randm(emb_dim, 4 * hidden));
  tower->wh_f = Var::param(randm(hidden, 4 * hidden));
  tower->bias_f = Var::param(Mat::Zero(1, 4 * hidden));
  tower->wx_b = Var::param(randm(emb_dim, 4 * hidden));
  tower->wh_b = Var::param(randm(hidden, 4 * hidden));
  tower->bias_b = Var::param(Mat::Zero(1, 4 * hidden));
  tower->params = {tower->emb,  tower->wx_f, tower->wh_f, tower->bias_f,
                   tower->wx_b, tower->wh_b, tower->bias_b};
  return tower;
}

LinkModel make_siamese_model(std::shared_ptr<SiameseTower> tower,
                             DistanceKind distance) {
  LinkModel m;
  m.variant = LinkVariant::Siamese;
  m.tower = std::move(tower);
  m.distance = distance;
  return m;
}

namespace {

const std::regex& rrid_token_re() {
  static const std::regex re("^(rrid:)?ab_[0-9]+$");
  return re;
}

}  // namespace

std::vector<std::string> overlap_candidate_tokens(const std::string& text,
                                                  const WordList& dictionary) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const std::string& raw : whitespace_split(text)) {
    std::string stripped = strip_outer_punct(raw);
    if (stripped.empty()) continue;  // pure punctuation
    std::string token = lowercase(stripped);
    if (token == "rrid" || std::regex_match(token, rrid_token_re())) continue;
    if (!contains_digit(token) && dictionary.contains(token)) continue;
    if (seen.insert(token).second) out.push_back(std::move(token));
  }
  return out;
}

int overlap_match_count(const std::string& text1, const std::string& text2,
                        const WordList& dictionary, double threshold) {
  auto tokens1 = overlap_candidate_tokens(text1, dictionary);
  auto tokens2 = overlap_candidate_tokens(text2, dictionary);
  int count = 0;
  for (const auto& u : tokens1)
    for (const auto& v : tokens2)
      if (jaro_winkler(u, v) >= threshold) ++count;
  return count;
}

namespace {

LinkLabel overlap_link(const LinkModel& model, const std::string& spec_text,
                       const std::string& rrid_text) {
  int count = overlap_match_count(spec_text, rrid_text, *model.dictionary,
                                  model.threshold);
  LinkLabel label;
  label.yes = count >= 1;
  label.score = std::min(1.0, static_cast<double>(count) / 3.0);
  return label;
}

LinkLabel pair_spc_link(const LinkModel& model, const std::string& spec_text,
                        const std::string& rrid_text) {
  TokenSequence spec_seq = tokenize(spec_text, model.vocab);
  TokenSequence rrid_seq = tokenize(rrid_text, model.vocab);
  if (spec_seq.empty() || rrid_seq.empty())
    throw DataError("pair classifier needs two non-empty snippets");
  EncoderOutput out = model.encoder->encode(spec_seq, rrid_seq);
  double logit = (out.H.row(0) * model.head_w.value())(0, 0) +
                 model.head_bias.value()(0, 0);
  LinkLabel label;
  label.score = 1.0 / (1.0 + std::exp(-logit));
  label.yes = label.score >= 0.5;
  label.truncated = out.truncated;
  return label;
}

LinkLabel siamese_link(const LinkModel& model, const std::string& spec_text,
                       const std::string& rrid_text) {
  const SiameseTower& tower = *model.tower;
  TokenSequence seq1 = tokenize(spec_text, tower.vocab);
  TokenSequence seq2 = tokenize(rrid_text, tower.vocab);
  if (seq1.empty() || seq2.empty())
    throw DataError("siamese model needs two non-empty snippets");
  Var u = siamese_encode_graph(tower, seq1.ids);
  Var v = siamese_encode_graph(tower, seq2.ids);
  double score = siamese_score_graph(u, v, model.distance).value()(0, 0);
  LinkLabel label;
  label.score = score;
  label.yes = score >= 0.5;
  return label;
}

}  // namespace

LinkLabel classify_link(const LinkModel& model, const std::string& spec_text,
                        const std::string& rrid_text) {
  switch (model.variant) {
    case LinkVariant::OverlapBaseline: return overlap_link(model, spec_text, rrid_text);
    case LinkVariant::PairSpc: return pair_spc_link(model, spec_text, rrid_text);
    case LinkVariant::Siamese: return siamese_link(model, spec_text, rrid_text);
  }
  throw DataError("unknown link variant");
}

LinkLabel classify_link_pair(const LinkModel& model, const CandidatePair& pair) {
  return classify_link(model, pair.spec.text(), pair.rrid.text());
}

Var pair_logit_graph(const Var& H, const Var& W, const Var& bias) {
  return ad::add_rowvec(ad::matmul(ad::slice_rows(H, 0, 1), W), bias);
}

Var siamese_encode_graph(const SiameseTower& tower, const std::vector<int>& ids) {
  const int H = tower.hidden;
  auto run = [&](const Var& wx, const Var& wh, const Var& bias, bool reversed) {
    Var h = Var::constant(Mat::Zero(1, H));
    Var c = Var::constant(Mat::Zero(1, H));
    const size_t T = ids.size();
    for (size_t step = 0; step < T; ++step) {
      int id = ids[reversed ? T - 1 - step : step];
      Var x = ad::gather_rows(tower.emb, {id});
      Var z = ad::add_rowvec(ad::add(ad::matmul(x, wx), ad::matmul(h, wh)), bias);
      Var gi = ad::sigmoid_v(ad::slice_cols(z, 0, H));
      Var gf = ad::sigmoid_v(ad::slice_cols(z, H, H));
      Var go = ad::sigmoid_v(ad::slice_cols(z, 2 * H, H));
      Var gc = ad::tanh_v(ad::slice_cols(z, 3 * H, H));
      c = ad::add(ad::cmul(gf, c), ad::cmul(gi, gc));
      h = ad::cmul(go, ad::tanh_v(c));
    }
    return h;
  };
  Var fwd = run(tower.wx_f, tower.wh_f, tower.bias_f, false);
  Var bwd = run(tower.wx_b, tower.wh_b, tower.bias_b, true);
  return ad::hcat(fwd, bwd);  // 1 x 2H
}

Var siamese_score_graph(const Var& u, const Var& v, DistanceKind distance) {
  Var diff = ad::sub(u, v);
  Var dist = distance == DistanceKind::Manhattan
                 ? ad::sum_all(ad::abs_v(diff))
                 : ad::sqrt_v(ad::sum_all(ad::cmul(diff, diff)));
  return ad::exp_v(ad::scale(dist, -1.0));
}

namespace {

Var bce_on_score(const Var& score, double target) {
  Var s = ad::clamp_v(score, 1e-7, 1.0 - 1e-7);
  Var pos = ad::scale(ad::log_v(s), -target);
  Var neg = ad::scale(ad::log_v(ad::add_scalar(ad::scale(s, -1.0), 1.0)),
                      -(1.0 - target));
  return ad::add(pos, neg);
}

struct PreparedPair {
  std::vector<int> ids_composed;  // pair_spc
  std::vector<int> ids1, ids2;    // siamese
  double target = 0.0;
};

}  // namespace

LinkModel train_link_model(const std::vector<LabeledPair>& dataset,
                           const TrainConfig& config, LinkTrainStats* stats) {
  LinkVariant variant = link_variant_from_name(config.link_variant);

  if (variant == LinkVariant::OverlapBaseline) {
    // no parameters: configuration is the model
    auto dict = std::make_shared<WordList>(
        config.dictionary.empty() ? WordList(std::vector<std::string>{})
                                  : WordList::load(config.dictionary));
    return make_overlap_model(dict, config.threshold);
  }
  if (dataset.empty()) throw DataError("training dataset is empty");

  Vocab vocab;
  for (const auto& ex : dataset) {
    tokenize_grow(ex.spec_text, vocab);
    tokenize_grow(ex.rrid_text, vocab);
  }

  LinkModel model;
  std::vector<Var> trainable;
  std::vector<PreparedPair> prepared;

  if (variant == LinkVariant::PairSpc) {
    MiniEncoderConfig enc_cfg{config.dim, config.layers, config.heads,
                              config.ffn_dim, config.max_len};
    auto encoder = std::make_shared<MiniEncoder>(enc_cfg, vocab, config.seed);
    model = make_pair_spc_model(encoder);
    trainable = {model.head_w, model.head_bias};
    if (config.train_encoder)
      for (Var& p : encoder->params()) trainable.push_back(p);
    for (const auto& ex : dataset) {
      TokenSequence s = tokenize(ex.spec_text, vocab);
      TokenSequence r = tokenize(ex.rrid_text, vocab);
      if (s.empty() || r.empty()) throw DataError("pair example with empty snippet");
      MiniEncoder::Composed c = encoder->compose(s, r);
      prepared.push_back({std::move(c.ids), {}, {}, ex.link ? 1.0 : 0.0});
    }
  } else {
    auto tower = make_siamese_tower(vocab, config.emb_dim, config.lstm_hidden,
                                    config.seed);
    model = make_siamese_model(tower, config.distance == "euclidean"
                                          ? DistanceKind::Euclidean
                                          : DistanceKind::Manhattan);
    trainable = tower->params;
    for (const auto& ex : dataset) {
      TokenSequence s = tokenize(ex.spec_text, vocab);
      TokenSequence r = tokenize(ex.rrid_text, vocab);
      if (s.empty() || r.empty()) throw DataError("pair example with empty snippet");
      prepared.push_back({{}, s.ids, r.ids, ex.link ? 1.0 : 0.0});
    }
  }

  auto example_loss = [&](const PreparedPair& ex) -> Var {
    if (variant == LinkVariant::PairSpc) {
      Var H = model.encoder->forward(ex.ids_composed);
      if (!config.train_encoder) H = Var::constant(H.value());
      return ad::bce_with_logits(pair_logit_graph(H, model.head_w, model.head_bias),
                                 ex.target);
    }
    Var u = siamese_encode_graph(*model.tower, ex.ids1);
    Var v = siamese_encode_graph(*model.tower, ex.ids2);
    return bce_on_score(siamese_score_graph(u, v, model.distance), ex.target);
  };

  Rng rng(config.seed);
  std::vector<size_t> order(prepared.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  size_t n_val = static_cast<size_t>(config.val_fraction *
                                     static_cast<double>(order.size()));
  if (n_val >= order.size()) n_val = order.size() - 1;
  std::vector<size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());
  const std::vector<size_t>& eval_idx = n_val > 0 ? val_idx : train_idx;

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
      for (size_t k = start; k < stop; ++k)
        losses.push_back(example_loss(prepared[train_idx[k]]));
      Var loss = ad::scale(ad::sum_vars(losses),
                           1.0 / static_cast<double>(losses.size()));
      if (config.l2_weight > 0.0 && variant == LinkVariant::PairSpc) {
        Var reg = ad::sum_all(ad::cmul(model.head_w, model.head_w));
        loss = ad::add(loss, ad::scale(reg, config.l2_weight));
      }
      ad::backward(loss);
      if (sgd) sgd->step(trainable);
      else adam->step(trainable);
    }
    double metric = 0.0;
    for (size_t i : eval_idx) metric += example_loss(prepared[i]).value()(0, 0);
    metric /= static_cast<double>(eval_idx.size());
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

nlohmann::json link_model_to_json(const LinkModel& model) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = "link_model";
  j["variant"] = link_variant_name(model.variant);
  switch (model.variant) {
    case LinkVariant::OverlapBaseline:
      j["threshold"] = model.threshold;
      j["dictionary"] = model.dictionary->sorted_words();
      break;
    case LinkVariant::PairSpc:
      j["head_w"] = mat_to_json(model.head_w.value());
      j["head_bias"] = mat_to_json(model.head_bias.value());
      j["encoder"] = model.encoder->to_json();
      break;
    case LinkVariant::Siamese: {
      const SiameseTower& t = *model.tower;
      j["distance"] = model.distance == DistanceKind::Euclidean ? "euclidean"
                                                                : "manhattan";
      j["emb_dim"] = t.emb_dim;
      j["hidden"] = t.hidden;
      j["vocab"] = t.vocab.to_json();
      j["emb"] = mat_to_json(t.emb.value());
      j["wx_f"] = mat_to_json(t.wx_f.value());
      j["wh_f"] = mat_to_json(t.wh_f.value());
      j["bias_f"] = mat_to_json(t.bias_f.value());
      j["wx_b"] = mat_to_json(t.wx_b.value());
      j["wh_b"] = mat_to_json(t.wh_b.value());
      j["bias_b"] = mat_to_json(t.bias_b.value());
      break;
    }
  }
  return j;
}

LinkModel link_model_from_json(const nlohmann::json& j) {
  if (j.value("kind", "") != "link_model")
    throw ParseError("archive kind is not link_model");
  if (j.value("format_version", 0) != 1)
    throw ParseError("unsupported link model archive version");
  LinkVariant variant = link_variant_from_name(j["variant"].get<std::string>());
  if (variant == LinkVariant::OverlapBaseline) {
    auto dict = std::make_shared<WordList>(
        j["dictionary"].get<std::vector<std::string>>());
    return make_overlap_model(dict, j["threshold"].get<double>());
  }
  if (variant == LinkVariant::PairSpc) {
    std::shared_ptr<MiniEncoder> encoder = MiniEncoder::from_json(j["encoder"]);
    LinkModel m = make_pair_spc_model(encoder);
    m.head_w.mutable_value() = mat_from_json(j["head_w"]);
    m.head_bias.mutable_value() = mat_from_json(j["head_bias"]);
    return m;
  }
  auto tower = make_siamese_tower(Vocab::from_json(j["vocab"]),
                                  j["emb_dim"].get<int>(), j["hidden"].get<int>(), 0);
  tower->emb.mutable_value() = mat_from_json(j["emb"]);
  tower->wx_f.mutable_value() = mat_from_json(j["wx_f"]);
  tower->wh_f.mutable_value() = mat_from_json(j["wh_f"]);
  tower->bias_f.mutable_value() = mat_from_json(j["bias_f"]);
  tower->wx_b.mutable_value() = mat_from_json(j["wx_b"]);
  tower->wh_b.mutable_value() = mat_from_json(j["wh_b"]);
  tower->bias_b.mutable_value() = mat_from_json(j["bias_b"]);
  return make_siamese_model(tower, j["distance"] == "euclidean"
                                       ? DistanceKind::Euclidean
                                       : DistanceKind::Manhattan);
}

void save_link_model(const LinkModel& model, const std::string& path) {
  write_file(path, link_model_to_json(model).dump());
}

LinkModel load_link_model(const std::string& path) {
  return link_model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace abspec
