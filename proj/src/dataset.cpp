#include "abspec/dataset.hpp"

#include <json.hpp>

#include "abspec/errors.hpp"
#include "abspec/utils.hpp"

namespace abspec {

std::string label_name(SpecificityLabel label) {
  switch (label) {
    case SpecificityLabel::Nonspecific: return "Nonspecific";
    case SpecificityLabel::Neutral: return "Neutral";
    case SpecificityLabel::Specific: return "Specific";
  }
  return "Neutral";
}

SpecificityLabel label_from_name(const std::string& name) {
  std::string k = lowercase(name);
  if (k == "nonspecific" || k == "non-specific" || k == "negative")
    return SpecificityLabel::Nonspecific;
  if (k == "neutral") return SpecificityLabel::Neutral;
  if (k == "specific" || k == "positive") return SpecificityLabel::Specific;
  throw DataError("unknown specificity label: " + name);
}

namespace {

nlohmann::json parse_jsonl_line(const std::string& line, const std::string& path,
                                size_t lineno) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

std::vector<LabeledSnippet> load_snippet_dataset(const std::string& path) {
  std::vector<LabeledSnippet> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = parse_jsonl_line(line, path, lineno);
    LabeledSnippet ex;
    if (!j.contains("text") || !j.contains("label"))
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": snippet record needs text and label");
    ex.text = j["text"].get<std::string>();
    ex.aspect = j.value("aspect", "");
    ex.label = label_from_name(j["label"].get<std::string>());
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<LabeledPair> load_pair_dataset(const std::string& path) {
  std::vector<LabeledPair> out;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = parse_jsonl_line(line, path, lineno);
    if (!j.contains("spec_snippet") || !j.contains("rrid_snippet") ||
        !j.contains("link"))
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": pair record needs spec_snippet, rrid_snippet and link");
    LabeledPair ex;
    ex.spec_text = j["spec_snippet"].get<std::string>();
    ex.rrid_text = j["rrid_snippet"].get<std::string>();
    std::string link = lowercase(j["link"].get<std::string>());
    if (link != "yes" && link != "no")
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": link must be yes or no");
    ex.link = link == "yes";
    if (j.contains("specificity"))
      ex.specificity = label_from_name(j["specificity"].get<std::string>());
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace abspec
