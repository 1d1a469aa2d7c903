#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace abspec {

// Whitespace tokenization keeping the original surfaces, so
// detokenize(tokenize(x)) == x modulo whitespace normalization. Ids are
// assigned on a normalized key (lowercased, outer punctuation stripped),
// which lets "(6E10)" and "6E10" share an id.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<std::string> texts;
  // Set on composed encoder inputs; -1 on plain tokenizations.
  int cls_pos = -1;
  int sep_pos = -1;

  size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;

  Vocab();

  static std::string normalize(const std::string& surface);

  int add(const std::string& key);          // grows the vocabulary
  int lookup(const std::string& key) const; // kUnk when absent
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(static_cast<size_t>(id)); }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

TokenSequence tokenize(const std::string& text, const Vocab& vocab);
// Adds unseen normalized tokens to the vocabulary (training time).
TokenSequence tokenize_grow(const std::string& text, Vocab& vocab);
std::string detokenize(const TokenSequence& seq);

}  // namespace abspec
