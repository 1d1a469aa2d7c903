#include "abspec/snippets.hpp"

#include <regex>

#include "abspec/errors.hpp"
#include "abspec/sentence_split.hpp"

namespace abspec {

namespace {

const std::regex& specific_re() {
  static const std::regex re("(S|s)pecific");
  return re;
}
const std::regex& background_re() {
  static const std::regex re("(B|b)ackground staining");
  return re;
}
const std::regex& cross_re() {
  static const std::regex re("(C|c)ross( |-)reactiv");
  return re;
}
const std::regex& antibody_re() {
  static const std::regex re("(A|a)ntibod(y|ies)");
  return re;
}
const std::regex& rrid_re() {
  static const std::regex re("AB_[0-9]+");
  return re;
}

// Earliest trigger match in the sentence; ties broken by the declaration
// order of the patterns.
bool find_trigger(const std::string& text, Trigger* trigger) {
  struct Candidate {
    Trigger t;
    const std::regex& re;
  };
  const Candidate candidates[] = {
      {Trigger::Specific, specific_re()},
      {Trigger::BackgroundStaining, background_re()},
      {Trigger::CrossReactive, cross_re()},
  };
  bool found = false;
  size_t best_pos = 0;
  for (const auto& c : candidates) {
    std::smatch m;
    if (std::regex_search(text, m, c.re)) {
      size_t pos = static_cast<size_t>(m.position(0));
      if (!found || pos < best_pos) {
        found = true;
        best_pos = pos;
        *trigger = c.t;
      }
    }
  }
  return found;
}

std::string join_sentences(const std::vector<Sentence>& sentences) {
  std::string out;
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (i) out += ' ';
    out += sentences[i].text;
  }
  return out;
}

// Window of up to one sentence on each side, within the paragraph.
std::vector<Sentence> window_around(const std::vector<Sentence>& paragraph,
                                    size_t idx, int* center) {
  std::vector<Sentence> out;
  size_t first = idx > 0 ? idx - 1 : idx;
  size_t last = idx + 1 < paragraph.size() ? idx + 1 : idx;
  for (size_t i = first; i <= last; ++i) out.push_back(paragraph[i]);
  *center = static_cast<int>(idx - first);
  return out;
}

nlohmann::json sentence_to_json(const Sentence& s) {
  return {
      {"text", s.text},
      {"section", s.loc.section},
      {"paragraph", s.loc.paragraph},
      {"sentence", s.loc.sentence},
      {"span", {s.loc.begin, s.loc.end}},
      {"figure_legend", s.loc.figure_legend},
  };
}

nlohmann::json location_to_json(const SentenceLocation& loc) {
  return {
      {"section", loc.section},
      {"paragraph", loc.paragraph},
      {"sentence", loc.sentence},
      {"span", {loc.begin, loc.end}},
      {"figure_legend", loc.figure_legend},
  };
}

}  // namespace

std::string trigger_name(Trigger t) {
  switch (t) {
    case Trigger::Specific: return "SPECIFIC";
    case Trigger::BackgroundStaining: return "BACKGROUND_STAINING";
    case Trigger::CrossReactive: return "CROSS_REACTIV";
  }
  return "SPECIFIC";
}

Trigger trigger_from_name(const std::string& name) {
  if (name == "SPECIFIC") return Trigger::Specific;
  if (name == "BACKGROUND_STAINING") return Trigger::BackgroundStaining;
  if (name == "CROSS_REACTIV") return Trigger::CrossReactive;
  throw DataError("unknown trigger name: " + name);
}

std::string SpecificitySnippet::text() const { return join_sentences(sentences); }

std::string RridMentionSnippet::text() const { return join_sentences(context); }

std::vector<std::vector<Sentence>> article_paragraph_sentences(const Article& article) {
  std::vector<std::vector<Sentence>> paragraphs;
  for (size_t si = 0; si < article.sections.size(); ++si) {
    const Section& sec = article.sections[si];
    for (size_t pi = 0; pi < sec.paragraphs.size(); ++pi) {
      const std::string& text = sec.paragraphs[pi];
      std::vector<Sentence> sentences;
      int k = 0;
      for (const SentenceSpan& sp : split_sentence_spans(text)) {
        Sentence s;
        s.text = text.substr(sp.begin, sp.end - sp.begin);
        s.loc = {static_cast<int>(si), static_cast<int>(pi), k++, sp.begin,
                 sp.end, false};
        sentences.push_back(std::move(s));
      }
      paragraphs.push_back(std::move(sentences));
    }
  }
  for (size_t li = 0; li < article.figure_legends.size(); ++li) {
    const std::string& text = article.figure_legends[li];
    std::vector<Sentence> sentences;
    int k = 0;
    for (const SentenceSpan& sp : split_sentence_spans(text)) {
      Sentence s;
      s.text = text.substr(sp.begin, sp.end - sp.begin);
      s.loc = {static_cast<int>(li), 0, k++, sp.begin, sp.end, true};
      sentences.push_back(std::move(s));
    }
    paragraphs.push_back(std::move(sentences));
  }
  return paragraphs;
}

std::vector<SpecificitySnippet> extract_specificity_snippets(const Article& article) {
  std::vector<SpecificitySnippet> out;
  for (const auto& paragraph : article_paragraph_sentences(article)) {
    for (size_t i = 0; i < paragraph.size(); ++i) {
      Trigger trigger;
      if (!find_trigger(paragraph[i].text, &trigger)) continue;
      SpecificitySnippet snip;
      snip.article_id = article.article_id;
      snip.trigger = trigger;
      snip.sentences = window_around(paragraph, i, &snip.center);
      snip.aspect_spans = antibody_spans(snip.text());
      if (snip.aspect_spans.empty()) continue;  // antibody filter
      out.push_back(std::move(snip));
    }
  }
  return out;
}

std::vector<RridMentionSnippet> extract_rrid_mentions(const Article& article) {
  std::vector<RridMentionSnippet> out;
  for (const auto& paragraph : article_paragraph_sentences(article)) {
    for (size_t i = 0; i < paragraph.size(); ++i) {
      for (const std::string& rrid : find_rrids(paragraph[i].text)) {
        RridMentionSnippet snip;
        snip.article_id = article.article_id;
        snip.rrid = rrid;
        snip.context = window_around(paragraph, i, &snip.center);
        out.push_back(std::move(snip));
      }
    }
  }
  return out;
}

std::vector<CandidatePair> build_candidate_pairs(const Article& article) {
  std::vector<CandidatePair> pairs;
  auto specs = extract_specificity_snippets(article);
  auto rrids = extract_rrid_mentions(article);
  pairs.reserve(specs.size() * rrids.size());
  for (const auto& s : specs)
    for (const auto& r : rrids) pairs.push_back({s, r, true});
  return pairs;
}

nlohmann::json to_json(const SpecificitySnippet& s) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& sent : s.sentences) sentences.push_back(sentence_to_json(sent));
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& [b, e] : s.aspect_spans) spans.push_back({b, e});
  return {
      {"kind", "specificity"},
      {"article_id", s.article_id},
      {"trigger", trigger_name(s.trigger)},
      {"text", s.text()},
      {"aspect_spans", spans},
      {"sentences", sentences},
      {"source", location_to_json(s.center_sentence().loc)},
  };
}

nlohmann::json to_json(const RridMentionSnippet& s) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& sent : s.context) sentences.push_back(sentence_to_json(sent));
  return {
      {"kind", "rrid_mention"},
      {"article_id", s.article_id},
      {"rrid", s.rrid},
      {"text", s.text()},
      {"sentences", sentences},
      {"source", location_to_json(s.center_sentence().loc)},
  };
}

bool matches_antibody_pattern(const std::string& text) {
  return std::regex_search(text, antibody_re());
}

bool matches_any_trigger(const std::string& text) {
  Trigger t;
  return find_trigger(text, &t);
}

std::vector<CharSpan> antibody_spans(const std::string& text) {
  std::vector<CharSpan> spans;
  auto begin = std::sregex_iterator(text.begin(), text.end(), antibody_re());
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    spans.emplace_back(static_cast<size_t>(it->position(0)),
                       static_cast<size_t>(it->position(0) + it->length(0)));
  }
  return spans;
}

std::vector<std::string> find_rrids(const std::string& text) {
  std::vector<std::string> out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), rrid_re());
  for (auto it = begin; it != std::sregex_iterator(); ++it) out.push_back(it->str());
  return out;
}

bool is_valid_rrid(const std::string& rrid) {
  static const std::regex full("^AB_[0-9]+$");
  return std::regex_match(rrid, full);
}

std::string normalize_rrid(const std::string& s) {
  std::string t = s;
  if (t.rfind("RRID:", 0) == 0) t = t.substr(5);
  if (!is_valid_rrid(t)) throw DataError("malformed RRID: " + s);
  return t;
}

}  // namespace abspec
