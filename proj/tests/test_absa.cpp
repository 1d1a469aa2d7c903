#include <doctest.h>

#include <cmath>

#include "abspec/aoa.hpp"
#include "abspec/errors.hpp"
#include "abspec/specificity.hpp"
#include "abspec/utils.hpp"
#include "grad_check.hpp"

using namespace abspec;
using absa::AoaAttention;
using ad::Mat;
using ad::Var;

namespace {

Mat random_mat(Rng& rng, int r, int c) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

std::vector<LabeledSnippet> tiny_dataset() {
  return {
      {"the antibody showed non-specific bands in blots", "antibody",
       SpecificityLabel::Nonspecific},
      {"strong non-specific staining was seen with this antibody", "antibody",
       SpecificityLabel::Nonspecific},
      {"the antibody was specific for its target", "antibody",
       SpecificityLabel::Specific},
      {"this antibody detected a single specific band", "antibody",
       SpecificityLabel::Specific},
      {"antibody arrays measure specificity in parallel", "antibody",
       SpecificityLabel::Neutral},
      {"protocols for antibody validation were reviewed", "antibody",
       SpecificityLabel::Neutral},
  };
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.dim = 16;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.ffn_dim = 32;
  cfg.max_len = 32;
  cfg.epochs = 40;
  cfg.lr = 5e-3;
  cfg.seed = 5;
  cfg.batch_size = 3;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("absa");

TEST_CASE("hand-computed attention example") {
  Mat a(2, 2), b(1, 2);
  a << 1, 0, 0, 1;
  b << 1, 0;
  AoaAttention att = absa::aoa_attention(a, b);
  REQUIRE(att.I.rows() == 2);
  REQUIRE(att.I.cols() == 1);
  CHECK(att.I(0, 0) == doctest::Approx(1.0));
  CHECK(att.I(1, 0) == doctest::Approx(0.0));
  double expected = std::exp(1.0) / (std::exp(1.0) + 1.0);
  CHECK(att.alpha(0, 0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(att.alpha(1, 0) == doctest::Approx(1.0 - expected).epsilon(1e-9));
  CHECK(att.alpha(0, 0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(att.beta(0, 0) == doctest::Approx(1.0));
  CHECK(att.beta(1, 0) == doctest::Approx(1.0));
  CHECK(att.beta_bar(0) == doctest::Approx(1.0));
  CHECK(att.gamma(0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(att.gamma(1) == doctest::Approx(0.2689).epsilon(1e-4));

  Eigen::VectorXd pooled = absa::aoa_pool(a, att.gamma);
  CHECK(pooled(0) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(pooled(1) == doctest::Approx(0.2689).epsilon(1e-4));
}

TEST_CASE("zero aspect rows give uniform gamma") {
  Mat a(4, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 1, 1;
  Mat b = Mat::Zero(2, 3);
  AoaAttention att = absa::aoa_attention(a, b);
  for (int i = 0; i < 4; ++i)
    CHECK(att.gamma(i) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("single aspect token: beta is all ones, gamma equals alpha") {
  Rng rng(3);
  Mat a = random_mat(rng, 5, 4), b = random_mat(rng, 1, 4);
  AoaAttention att = absa::aoa_attention(a, b);
  for (int i = 0; i < 5; ++i) CHECK(att.beta(i, 0) == doctest::Approx(1.0));
  CHECK(att.beta_bar(0) == doctest::Approx(1.0));
  for (int i = 0; i < 5; ++i)
    CHECK(att.gamma(i) == doctest::Approx(att.alpha(i, 0)).epsilon(1e-12));
}

TEST_CASE("simplex invariants over random shapes") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    int n = static_cast<int>(rng.uniform_int(1, 32));
    int m = static_cast<int>(rng.uniform_int(1, 32));
    int d = static_cast<int>(rng.uniform_int(1, 8));
    AoaAttention att = absa::aoa_attention(random_mat(rng, n, d), random_mat(rng, m, d));
    for (int j = 0; j < m; ++j)
      CHECK(std::abs(att.alpha.col(j).sum() - 1.0) <= 1e-9);
    for (int i = 0; i < n; ++i)
      CHECK(std::abs(att.beta.row(i).sum() - 1.0) <= 1e-9);
    CHECK(std::abs(att.beta_bar.sum() - 1.0) <= 1e-9);
    CHECK(std::abs(att.gamma.sum() - 1.0) <= 1e-9);
    CHECK(att.alpha.minCoeff() >= 0.0);
    CHECK(att.beta.minCoeff() >= 0.0);
    CHECK(att.gamma.minCoeff() >= 0.0);
  }
}

TEST_CASE("aoa_pool respects convex combination bounds") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    int n = static_cast<int>(rng.uniform_int(1, 12));
    int d = static_cast<int>(rng.uniform_int(1, 6));
    Mat a = random_mat(rng, n, d);
    AoaAttention att = absa::aoa_attention(a, random_mat(rng, 2, d));
    Eigen::VectorXd pooled = absa::aoa_pool(a, att.gamma);
    for (int j = 0; j < d; ++j) {
      CHECK(pooled(j) >= a.col(j).minCoeff() - 1e-12);
      CHECK(pooled(j) <= a.col(j).maxCoeff() + 1e-12);
    }
  }
}

TEST_CASE("aoa_pool special cases and errors") {
  Mat a(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  Eigen::Vector3d uniform(1.0 / 3, 1.0 / 3, 1.0 / 3);
  Eigen::VectorXd mean = absa::aoa_pool(a, uniform);
  CHECK(mean(0) == doctest::Approx(3.0));
  CHECK(mean(1) == doctest::Approx(4.0));

  Eigen::Vector3d onehot(0, 1, 0);
  Eigen::VectorXd row = absa::aoa_pool(a, onehot);
  CHECK(row(0) == doctest::Approx(3.0));
  CHECK(row(1) == doctest::Approx(4.0));

  Eigen::Vector2d short_gamma(0.5, 0.5);
  CHECK_THROWS_AS(absa::aoa_pool(a, short_gamma), DataError);
  Eigen::Vector3d not_simplex(0.5, 0.2, 0.1);
  CHECK_THROWS_AS(absa::aoa_pool(a, not_simplex), DataError);
}

TEST_CASE("cls_concat stacks and recovers both inputs") {
  Eigen::VectorXd h0(2), r(2);
  h0 << 1, 2;
  r << 3, 4;
  Eigen::VectorXd cat = absa::cls_concat(h0, r);
  REQUIRE(cat.size() == 4);
  CHECK(cat(0) == 1);
  CHECK(cat(3) == 4);
  CHECK(cat.head(2) == h0);
  CHECK(cat.tail(2) == r);

  Eigen::VectorXd zero4 = absa::cls_concat(Eigen::VectorXd::Zero(2),
                                           Eigen::VectorXd::Zero(2));
  CHECK(zero4.isZero());

  Eigen::VectorXd odd(3);
  odd << 1, 2, 3;
  CHECK_THROWS_AS(absa::cls_concat(h0, odd), DataError);
}

TEST_CASE("non-finite input is rejected") {
  Mat a(1, 2), b(1, 2);
  a << 1.0, std::numeric_limits<double>::quiet_NaN();
  b << 1.0, 2.0;
  CHECK_THROWS_AS(absa::aoa_attention(a, b), DataError);
}

TEST_CASE("permuting snippet rows permutes gamma and keeps the pooled vector") {
  Rng rng(47);
  Mat a = random_mat(rng, 6, 4), b = random_mat(rng, 3, 4);
  AoaAttention att = absa::aoa_attention(a, b);
  std::vector<int> perm = {3, 0, 5, 1, 4, 2};
  Mat ap(6, 4);
  for (int i = 0; i < 6; ++i) ap.row(i) = a.row(perm[i]);
  AoaAttention attp = absa::aoa_attention(ap, b);
  for (int i = 0; i < 6; ++i)
    CHECK(attp.gamma(i) == doctest::Approx(att.gamma(perm[i])).epsilon(1e-12));
  Eigen::VectorXd r1 = absa::aoa_pool(a, att.gamma);
  Eigen::VectorXd r2 = absa::aoa_pool(ap, attp.gamma);
  for (int j = 0; j < 4; ++j) CHECK(r1(j) == doctest::Approx(r2(j)).epsilon(1e-12));
}

TEST_CASE("graph head agrees with the plain-matrix path") {
  Rng rng(8);
  int n = 4, m = 2, d = 6;
  Mat H = random_mat(rng, n + m + 2, d);
  Mat W = random_mat(rng, 2 * d, 3), bias = random_mat(rng, 1, 3);

  Var logits = head_logits_graph(Var::constant(H), n, m, HeadVariant::AOA_CLS,
                                 Var::constant(W), Var::constant(bias));

  EncoderOutput out{H, n, m, d, 0, false};
  EncoderSlices s = slice_outputs(out);
  AoaAttention att = absa::aoa_attention(s.a, s.b);
  Eigen::VectorXd repr =
      absa::cls_concat(s.h0.transpose(), absa::aoa_pool(s.a, att.gamma));
  Eigen::RowVector3d plain = repr.transpose() * W + bias;
  for (int k = 0; k < 3; ++k)
    CHECK(logits.value()(0, k) == doctest::Approx(plain(k)).epsilon(1e-12));
}

TEST_CASE("full head loss gradients match finite differences") {
  Rng rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    int n = 2 + trial, m = 1 + trial % 3, d = 4;
    for (HeadVariant variant : {HeadVariant::AOA, HeadVariant::AOA_CLS,
                                HeadVariant::ENC_SPC}) {
      int in_dim = variant == HeadVariant::AOA_CLS ? 2 * d : d;
      std::vector<Var> params = {Var::param(random_mat(rng, n + m + 2, d)),
                                 Var::param(random_mat(rng, in_dim, 3)),
                                 Var::param(random_mat(rng, 1, 3))};
      auto forward = [&]() {
        Var logits = head_logits_graph(params[0], n, m, variant, params[1], params[2]);
        return ad::softmax_xent(logits, trial % 3);
      };
      CHECK(grad_check_rel_error(params, forward) < 1e-4);
    }
  }
}

TEST_CASE("argmax is invariant to constant logit shifts") {
  Rng rng(71);
  Mat W = random_mat(rng, 4, 3);
  Eigen::RowVectorXd repr = random_mat(rng, 1, 4);
  Eigen::RowVector3d logits = repr * W;
  auto argmax = [](const Eigen::RowVector3d& z) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (z(k) > z(best)) best = k;
    return best;
  };
  for (double c : {-100.0, -1.0, 0.5, 42.0})
    CHECK(argmax(logits) == argmax((logits.array() + c).matrix()));
}

TEST_CASE("zero-initialized head predicts the uniform distribution") {
  std::vector<LabeledSnippet> data = tiny_dataset();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 0;  // keep the zero-initialized head
  SpecificityModel model = train_specificity(data, cfg);
  ClassifyResult r = classify_text(model, data[0].text, data[0].aspect);
  for (int k = 0; k < 3; ++k) CHECK(r.probs(k) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  // ties break toward Nonspecific
  CHECK(r.label == SpecificityLabel::Nonspecific);
  // mean cross entropy of the uniform prediction is ln 3
  CHECK(-std::log(r.probs(static_cast<int>(data[0].label))) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("training memorizes a single example") {
  std::vector<LabeledSnippet> data = {
      {"this antibody was specific in all assays", "antibody",
       SpecificityLabel::Specific}};
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 30;
  SpecificityModel model = train_specificity(data, cfg);
  ClassifyResult r = classify_text(model, data[0].text, data[0].aspect);
  CHECK(r.label == SpecificityLabel::Specific);
  CHECK(r.probs(2) > 0.5);
}

TEST_CASE("training fits the tiny dataset and stays deterministic") {
  std::vector<LabeledSnippet> data = tiny_dataset();
  TrainConfig cfg = tiny_train_config();
  SpecificityModel m1 = train_specificity(data, cfg);
  SpecificityModel m2 = train_specificity(data, cfg);
  CHECK(specificity_model_to_json(m1).dump() == specificity_model_to_json(m2).dump());
  int correct = 0;
  for (const auto& ex : data)
    if (classify_text(m1, ex.text, ex.aspect).label == ex.label) ++correct;
  CHECK(correct == static_cast<int>(data.size()));
}

TEST_CASE("very large l2 drives the head toward uniform output") {
  std::vector<LabeledSnippet> data = tiny_dataset();
  TrainConfig cfg = tiny_train_config();
  cfg.l2_weight = 1e4;
  cfg.epochs = 25;
  SpecificityModel model = train_specificity(data, cfg);
  ClassifyResult r = classify_text(model, data[0].text, data[0].aspect);
  for (int k = 0; k < 3; ++k) CHECK(r.probs(k) == doctest::Approx(1.0 / 3).epsilon(1e-2));
}

TEST_CASE("a class can be absent; training proceeds with a warning") {
  std::vector<LabeledSnippet> data = {
      {"the antibody was specific", "antibody", SpecificityLabel::Specific},
      {"non-specific staining with the antibody", "antibody",
       SpecificityLabel::Nonspecific}};
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 5;
  SpecificityModel model = train_specificity(data, cfg);  // should not throw
  CHECK(model.head_w.value().rows() == model.head_input_dim());
}

TEST_CASE("enc_only ignores the aspect; aspect-taking variants require one") {
  std::vector<LabeledSnippet> data = tiny_dataset();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 2;
  cfg.head_variant = "enc_only";
  SpecificityModel enc_only = train_specificity(data, cfg);
  ClassifyResult with_aspect = classify_text(enc_only, data[0].text, "antibody");
  ClassifyResult without = classify_text(enc_only, data[0].text, "");
  CHECK(with_aspect.probs == without.probs);

  cfg.head_variant = "aoa_cls";
  SpecificityModel aoa = train_specificity(data, cfg);
  CHECK_THROWS_AS(classify_text(aoa, data[0].text, ""), DataError);
}

TEST_CASE("aspect surface extraction modes") {
  std::string text = "bands were seen with the 6E10 antibody in blots";
  CharSpan span{30, 38};
  REQUIRE(text.substr(span.first, span.second - span.first) == "antibody");
  CHECK(aspect_surface(text, span, AspectMode::Token) == "antibody");
  CHECK(aspect_surface(text, span, AspectMode::Phrase) == "the 6E10 antibody");
  CHECK(aspect_surface("antibody first", {0, 8}, AspectMode::Phrase) == "antibody");
}

TEST_CASE("specificity model archive round-trips") {
  std::vector<LabeledSnippet> data = tiny_dataset();
  TrainConfig cfg = tiny_train_config();
  cfg.epochs = 6;
  SpecificityModel model = train_specificity(data, cfg);
  SpecificityModel restored =
      specificity_model_from_json(specificity_model_to_json(model));
  ClassifyResult a = classify_text(model, data[0].text, data[0].aspect);
  ClassifyResult b = classify_text(restored, data[0].text, data[0].aspect);
  CHECK(a.label == b.label);
  CHECK(a.probs == b.probs);
}

TEST_SUITE_END();
