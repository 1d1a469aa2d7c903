#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace abspec {

struct Section {
  std::string title;
  std::vector<std::string> paragraphs;
};

// A parsed full-text article. Figure legends are kept separate from body
// sections; downstream windowing treats each legend as its own
// single-paragraph unit so snippets never cross from body text into a legend.
struct Article {
  std::string article_id;
  std::vector<Section> sections;
  std::vector<std::string> figure_legends;
};

// Input schema (one object per file or JSON-lines):
//   {"article_id": str,
//    "sections": [{"title": str, "paragraphs": [str]}],
//    "figure_legends": [str]}
// figure_legends may be omitted. Throws ParseError naming the offending field.
Article parse_article(const nlohmann::json& doc);
Article parse_article_json(const std::string& text);

nlohmann::json article_to_json(const Article& article);

}  // namespace abspec
