#include "abspec/tokenizer.hpp"

#include "abspec/errors.hpp"
#include "abspec/utils.hpp"

namespace abspec {

Vocab::Vocab() {
  for (const char* reserved : {"<pad>", "<unk>", "<cls>", "<sep>"}) add(reserved);
}

std::string Vocab::normalize(const std::string& surface) {
  std::string key = strip_outer_punct(surface);
  if (key.empty()) key = surface;  // pure punctuation keeps its own id
  return lowercase(key);
}

int Vocab::add(const std::string& key) {
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  int id = static_cast<int>(tokens_.size());
  tokens_.push_back(key);
  index_.emplace(key, id);
  return id;
}

int Vocab::lookup(const std::string& key) const {
  auto it = index_.find(key);
  return it == index_.end() ? kUnk : it->second;
}

nlohmann::json Vocab::to_json() const { return tokens_; }

Vocab Vocab::from_json(const nlohmann::json& j) {
  Vocab v;
  size_t i = 0;
  for (const auto& tok : j) {
    std::string s = tok.get<std::string>();
    if (i >= v.tokens_.size()) v.add(s);
    else if (v.tokens_[i] != s)
      throw ParseError("vocab archive does not start with the reserved tokens");
    ++i;
  }
  return v;
}

TokenSequence tokenize(const std::string& text, const Vocab& vocab) {
  TokenSequence seq;
  for (std::string& surface : whitespace_split(text)) {
    seq.ids.push_back(vocab.lookup(Vocab::normalize(surface)));
    seq.texts.push_back(std::move(surface));
  }
  return seq;
}

TokenSequence tokenize_grow(const std::string& text, Vocab& vocab) {
  TokenSequence seq;
  for (std::string& surface : whitespace_split(text)) {
    seq.ids.push_back(vocab.add(Vocab::normalize(surface)));
    seq.texts.push_back(std::move(surface));
  }
  return seq;
}

std::string detokenize(const TokenSequence& seq) {
  std::string out;
  for (size_t i = 0; i < seq.texts.size(); ++i) {
    if (i) out += ' ';
    out += seq.texts[i];
  }
  return out;
}

}  // namespace abspec
