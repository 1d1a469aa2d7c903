#include <doctest.h>

#include "abspec/encoder.hpp"
#include "abspec/errors.hpp"
#include "abspec/tokenizer.hpp"
#include "abspec/utils.hpp"
#include "grad_check.hpp"

using namespace abspec;
using ad::Mat;
using ad::Var;

namespace {

Vocab vocab_from(const std::vector<std::string>& texts) {
  Vocab v;
  for (const auto& t : texts) tokenize_grow(t, v);
  return v;
}

MiniEncoderConfig tiny_config() {
  MiniEncoderConfig cfg;
  cfg.dim = 8;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.ffn_dim = 16;
  cfg.max_len = 24;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("encoder");

TEST_CASE("whitespace tokenization keeps surfaces and round-trips") {
  Vocab v = vocab_from({"6E10 antibody"});
  TokenSequence seq = tokenize("6E10 antibody", v);
  REQUIRE(seq.size() == 2);
  CHECK(seq.texts[0] == "6E10");
  CHECK(seq.texts[1] == "antibody");
  CHECK(detokenize(seq) == "6E10 antibody");

  CHECK(tokenize("", v).empty());
}

TEST_CASE("detokenize(tokenize(x)) equals x modulo whitespace normalization") {
  Vocab v;
  const std::vector<std::string> corpus = {
      "Some non-specific bands were detected at ~55 kDa.",
      "Purified  anti-b-Amyloid,\t1-16 antibody (6E10) was used",
      "A   B  C", "one"};
  for (const auto& text : corpus) {
    TokenSequence seq = tokenize_grow(text, v);
    std::string norm;
    for (const auto& w : whitespace_split(text)) {
      if (!norm.empty()) norm += ' ';
      norm += w;
    }
    CHECK(detokenize(seq) == norm);
  }
}

TEST_CASE("normalized ids are shared across punctuation and case variants") {
  Vocab v;
  tokenize_grow("(6E10) used", v);
  TokenSequence a = tokenize("6e10", v);
  TokenSequence b = tokenize("(6E10)", v);
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(a.ids[0] == b.ids[0]);
  CHECK(a.ids[0] != Vocab::kUnk);
  CHECK(tokenize("neverseen", v).ids[0] == Vocab::kUnk);
}

TEST_CASE("encode produces n+m+2 rows and exact slices") {
  Vocab v = vocab_from({"alpha beta gamma", "target aspect"});
  MiniEncoder enc(tiny_config(), v, 11);
  TokenSequence s = tokenize("alpha beta gamma", v);   // n = 3
  TokenSequence t = tokenize("target aspect", v);      // m = 2
  EncoderOutput out = enc.encode(s, t);
  CHECK(out.n == 3);
  CHECK(out.m == 2);
  CHECK(out.H.rows() == 7);
  CHECK(out.H.cols() == 8);
  CHECK(out.H.allFinite());
  CHECK_FALSE(out.truncated);

  EncoderSlices sl = slice_outputs(out);
  CHECK(sl.a.rows() == 3);
  CHECK(sl.b.rows() == 2);
  CHECK(sl.h0 == out.H.row(0));
  // h0, a, the SEP row, b reconstruct H
  Mat rebuilt(out.H.rows(), out.H.cols());
  rebuilt.row(0) = sl.h0;
  rebuilt.middleRows(1, 3) = sl.a;
  rebuilt.row(4) = out.H.row(4);
  rebuilt.middleRows(5, 2) = sl.b;
  CHECK(rebuilt == out.H);

  // n=2, m=1 gives 5 rows
  EncoderOutput small = enc.encode(tokenize("alpha beta", v), tokenize("target", v));
  CHECK(small.H.rows() == 5);
}

TEST_CASE("zero parameters map every position to the same row") {
  Vocab v = vocab_from({"a b c d"});
  MiniEncoder enc(tiny_config(), v, 5);
  enc.set_all_zero();
  EncoderOutput out = enc.encode(tokenize("a b c", v), tokenize("d", v));
  for (Eigen::Index i = 1; i < out.H.rows(); ++i)
    CHECK(out.H.row(i) == out.H.row(0));
}

TEST_CASE("encoding is deterministic for a fixed seed") {
  Vocab v = vocab_from({"x y z w"});
  MiniEncoder e1(tiny_config(), v, 42);
  MiniEncoder e2(tiny_config(), v, 42);
  TokenSequence s = tokenize("x y z", v), t = tokenize("w", v);
  CHECK(e1.encode(s, t).H == e2.encode(s, t).H);
  CHECK(e1.encode(s, t).H == e1.encode(s, t).H);
}

TEST_CASE("over-length inputs truncate the snippet tail, never the aspect") {
  Vocab v;
  std::string long_text;
  for (int i = 0; i < 40; ++i) long_text += "w" + std::to_string(i) + " ";
  tokenize_grow(long_text, v);
  tokenize_grow("aspect token here", v);
  MiniEncoderConfig cfg = tiny_config();  // max_len 24
  MiniEncoder enc(cfg, v, 3);
  TokenSequence s = tokenize(long_text, v);
  TokenSequence t = tokenize("aspect token here", v);
  EncoderOutput out = enc.encode(s, t);
  CHECK(out.truncated);
  CHECK(out.m == 3);
  CHECK(out.n == cfg.max_len - 2 - 3);
  CHECK(out.H.rows() == cfg.max_len);

  // an aspect that cannot fit is an error
  std::string huge_aspect;
  for (int i = 0; i < 30; ++i) huge_aspect += "a" + std::to_string(i) + " ";
  tokenize_grow(huge_aspect, v);
  MiniEncoder enc2(cfg, v, 3);
  CHECK_THROWS_AS(enc2.encode(s, tokenize(huge_aspect, v)), DataError);
}

TEST_CASE("encoder archive round-trips") {
  Vocab v = vocab_from({"p q r s"});
  MiniEncoder enc(tiny_config(), v, 9);
  auto restored = MiniEncoder::from_json(enc.to_json());
  TokenSequence s = tokenize("p q r", v), t = tokenize("s", v);
  CHECK(restored->encode(s, t).H == enc.encode(s, t).H);
}

TEST_CASE("mini encoder gradients match finite differences") {
  Vocab v = vocab_from({"a b c", "d"});
  MiniEncoderConfig cfg = tiny_config();
  cfg.layers = 1;
  MiniEncoder enc(cfg, v, 17);
  TokenSequence s = tokenize("a b c", v), t = tokenize("d", v);
  MiniEncoder::Composed comp = enc.compose(s, t);

  Rng rng(99);
  Mat probe(static_cast<Eigen::Index>(comp.ids.size()), cfg.dim);
  for (Eigen::Index i = 0; i < probe.size(); ++i) probe.data()[i] = rng.normal();
  Var probe_v = Var::constant(probe);

  auto forward = [&]() {
    return ad::sum_all(ad::cmul(enc.forward(comp.ids), probe_v));
  };
  // embedding parameters are the first two entries
  std::vector<Var> embeddings = {enc.params()[0], enc.params()[1]};
  CHECK(grad_check_rel_error(embeddings, forward) < 1e-4);
  // and the rest of the stack while we are here
  CHECK(grad_check_rel_error(enc.params(), forward) < 1e-4);
}

TEST_CASE("callback adapter fulfils the backend contract") {
  int dim = 4;
  auto fn = [dim](const std::vector<int>& s, const std::vector<int>& t) {
    Eigen::Index rows = static_cast<Eigen::Index>(s.size() + t.size()) + 2;
    Mat H(rows, dim);
    for (Eigen::Index i = 0; i < H.rows(); ++i)
      for (Eigen::Index j = 0; j < H.cols(); ++j)
        H(i, j) = static_cast<double>(i * 10 + j);
    return H;
  };
  CallbackEncoder adapter(fn, dim, 16, "fixture-adapter");
  Vocab v = vocab_from({"a b c d"});
  EncoderOutput out = adapter.encode(tokenize("a b c", v), tokenize("d", v));
  CHECK(out.H.rows() == 6);
  CHECK(out.d == 4);
  EncoderSlices sl = slice_outputs(out);
  CHECK(sl.a(0, 0) == 10.0);
  CHECK(sl.b(0, 0) == 50.0);

  auto bad = [dim](const std::vector<int>&, const std::vector<int>&) {
    return Mat::Zero(3, dim).eval();
  };
  CallbackEncoder broken(bad, dim, 16, "broken");
  CHECK_THROWS_AS(broken.encode(tokenize("a b c", v), tokenize("d", v)), DataError);
}

TEST_SUITE_END();
