#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "abspec/article.hpp"

namespace abspec {

struct SentenceLocation {
  int section = 0;    // body section index, or legend index when figure_legend
  int paragraph = 0;  // always 0 for figure legends
  int sentence = 0;
  size_t begin = 0;   // byte span into the source paragraph, half-open
  size_t end = 0;
  bool figure_legend = false;
};

struct Sentence {
  std::string text;
  SentenceLocation loc;
};

enum class Trigger { Specific, BackgroundStaining, CrossReactive };

std::string trigger_name(Trigger t);
Trigger trigger_from_name(const std::string& name);

using CharSpan = std::pair<size_t, size_t>;

// Window of 1-3 consecutive sentences around a trigger sentence. The
// trigger sentence sits in the middle when three sentences are present;
// windows never cross paragraph or figure-legend boundaries.
struct SpecificitySnippet {
  std::string article_id;
  std::vector<Sentence> sentences;
  int center = 0;  // index of the trigger sentence within `sentences`
  Trigger trigger = Trigger::Specific;
  std::vector<CharSpan> aspect_spans;  // antibody matches, spans into text()

  const Sentence& center_sentence() const { return sentences[center]; }
  std::string text() const;  // sentences joined with a single space
};

struct RridMentionSnippet {
  std::string article_id;
  std::string rrid;  // AB_<digits>
  std::vector<Sentence> context;
  int center = 0;

  const Sentence& center_sentence() const { return context[center]; }
  std::string text() const;
};

struct CandidatePair {
  SpecificitySnippet spec;
  RridMentionSnippet rrid;
  bool same_article = true;
};

// All sentences of the article grouped per paragraph, body sections first,
// then figure legends (one paragraph each).
std::vector<std::vector<Sentence>> article_paragraph_sentences(const Article& article);

std::vector<SpecificitySnippet> extract_specificity_snippets(const Article& article);
std::vector<RridMentionSnippet> extract_rrid_mentions(const Article& article);
// Full cross product of the article's specificity snippets and RRID mentions.
std::vector<CandidatePair> build_candidate_pairs(const Article& article);

nlohmann::json to_json(const SpecificitySnippet& s);
nlohmann::json to_json(const RridMentionSnippet& s);

// Regex helpers shared with tests and the linking baseline.
bool matches_antibody_pattern(const std::string& text);
bool matches_any_trigger(const std::string& text);
std::vector<CharSpan> antibody_spans(const std::string& text);
std::vector<std::string> find_rrids(const std::string& text);
bool is_valid_rrid(const std::string& rrid);        // AB_[0-9]+ exactly
std::string normalize_rrid(const std::string& s);   // strips RRID: prefix, validates

}  // namespace abspec
