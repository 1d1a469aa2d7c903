#include "abspec/article.hpp"

#include "abspec/errors.hpp"

namespace abspec {

namespace {

std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::string& where) {
  if (!obj.contains(key))
    throw ParseError("missing field: " + where + key);
  if (!obj[key].is_string())
    throw ParseError("expected string: " + where + key);
  return obj[key].get<std::string>();
}

}  // namespace

Article parse_article(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("article document must be a JSON object");
  Article article;
  article.article_id = require_string(doc, "article_id", "");
  if (article.article_id.empty()) throw ParseError("article_id is empty");

  if (!doc.contains("sections") || !doc["sections"].is_array())
    throw ParseError("missing or non-array field: sections");
  if (doc["sections"].empty()) throw ParseError("no sections");

  size_t si = 0;
  for (const auto& sec : doc["sections"]) {
    std::string where = "sections[" + std::to_string(si) + "].";
    if (!sec.is_object()) throw ParseError("expected object: sections[" + std::to_string(si) + "]");
    Section section;
    section.title = require_string(sec, "title", where);
    if (!sec.contains("paragraphs") || !sec["paragraphs"].is_array())
      throw ParseError("missing or non-array field: " + where + "paragraphs");
    size_t pi = 0;
    for (const auto& p : sec["paragraphs"]) {
      if (!p.is_string())
        throw ParseError("expected string: " + where + "paragraphs[" +
                         std::to_string(pi) + "]");
      section.paragraphs.push_back(p.get<std::string>());
      ++pi;
    }
    article.sections.push_back(std::move(section));
    ++si;
  }

  if (doc.contains("figure_legends")) {
    if (!doc["figure_legends"].is_array())
      throw ParseError("expected array: figure_legends");
    size_t li = 0;
    for (const auto& l : doc["figure_legends"]) {
      if (!l.is_string())
        throw ParseError("expected string: figure_legends[" + std::to_string(li) + "]");
      article.figure_legends.push_back(l.get<std::string>());
      ++li;
    }
  }
  return article;
}

Article parse_article_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_article(doc);
}

nlohmann::json article_to_json(const Article& article) {
  nlohmann::json doc;
  doc["article_id"] = article.article_id;
  doc["sections"] = nlohmann::json::array();
  for (const auto& sec : article.sections)
    doc["sections"].push_back({{"title", sec.title}, {"paragraphs", sec.paragraphs}});
  doc["figure_legends"] = article.figure_legends;
  return doc;
}

}  // namespace abspec
