#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "abspec/article.hpp"
#include "abspec/linking.hpp"
#include "abspec/specificity.hpp"

struct sqlite3;

namespace abspec {

// One alert triple: an antibody RRID, the specificity class stated by the
// evidence snippet, and the snippet itself. Neutral snippets never become
// entries. Unique key: (rrid, article_id, evidence hash).
struct KbEntry {
  std::string rrid;
  SpecificityLabel specificity = SpecificityLabel::Nonspecific;
  std::string evidence;
  std::string article_id;
  Eigen::Vector3d spec_probs = Eigen::Vector3d::Zero();
  double link_score = 0.0;
  std::string created_at;

  std::string evidence_hash() const;
};

nlohmann::json kb_entry_to_json(const KbEntry& entry);

// Classify every (snippet, aspect) of the article, link non-Neutral snippets
// to the article's RRID mentions, and emit one entry per linked triple.
// Per-snippet failures are logged to stderr and skipped.
std::vector<KbEntry> run_pipeline(const Article& article,
                                  const SpecificityModel& spec_model,
                                  const LinkModel& link_model);

// Embedded single-file store. Single writer, idempotent inserts on the
// unique key.
class KbStore {
 public:
  explicit KbStore(const std::string& path);
  ~KbStore();
  KbStore(const KbStore&) = delete;
  KbStore& operator=(const KbStore&) = delete;

  // Returns the number of rows actually inserted (idempotent on the key).
  int insert(const std::vector<KbEntry>& entries);
  // Validates the RRID; results come Nonspecific first.
  std::vector<KbEntry> query(const std::string& rrid) const;
  std::vector<KbEntry> all() const;
  void export_jsonl(const std::string& path) const;

 private:
  sqlite3* db_ = nullptr;
};

std::string format_alert(const KbEntry& entry);

}  // namespace abspec
