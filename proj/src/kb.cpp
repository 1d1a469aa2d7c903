#include "abspec/kb.hpp"

#include <sqlite3.h>

#include <iostream>
#include <map>
#include <sstream>

#include "abspec/errors.hpp"
#include "abspec/utils.hpp"

namespace abspec {

std::string KbEntry::evidence_hash() const { return to_hex(fnv1a64(evidence)); }

nlohmann::json kb_entry_to_json(const KbEntry& entry) {
  return {
      {"rrid", entry.rrid},
      {"specificity", label_name(entry.specificity)},
      {"evidence", entry.evidence},
      {"article_id", entry.article_id},
      {"spec_probs",
       {entry.spec_probs(0), entry.spec_probs(1), entry.spec_probs(2)}},
      {"link_score", entry.link_score},
      {"created_at", entry.created_at},
      {"evidence_hash", entry.evidence_hash()},
  };
}

std::vector<KbEntry> run_pipeline(const Article& article,
                                  const SpecificityModel& spec_model,
                                  const LinkModel& link_model) {
  auto specs = extract_specificity_snippets(article);
  auto rrids = extract_rrid_mentions(article);
  // key -> entry, keeping the alerting class and the strongest link
  std::map<std::string, KbEntry> deduped;
  const std::string created_at = utc_timestamp();
  for (const auto& snippet : specs) {
    for (const CharSpan& span : snippet.aspect_spans) {
      try {
        ClassifyResult cls = classify_specificity(spec_model, snippet, span);
        if (cls.label == SpecificityLabel::Neutral) continue;
        for (const auto& mention : rrids) {
          LinkLabel link = classify_link(link_model, snippet.text(), mention.text());
          if (!link.yes) continue;
          KbEntry entry;
          entry.rrid = mention.rrid;
          entry.specificity = cls.label;
          entry.evidence = snippet.text();
          entry.article_id = article.article_id;
          entry.spec_probs = cls.probs;
          entry.link_score = link.score;
          entry.created_at = created_at;
          std::string key = entry.rrid + "|" + entry.article_id + "|" +
                            entry.evidence_hash();
          auto [it, inserted] = deduped.try_emplace(key, entry);
          if (!inserted) {
            KbEntry& kept = it->second;
            bool alert_upgrade =
                entry.specificity == SpecificityLabel::Nonspecific &&
                kept.specificity != SpecificityLabel::Nonspecific;
            bool stronger_link = entry.specificity == kept.specificity &&
                                 entry.link_score > kept.link_score;
            if (alert_upgrade || stronger_link) kept = entry;
          }
        }
      } catch (const std::exception& e) {
        std::cerr << "warning: skipped a snippet in " << article.article_id
                  << ": " << e.what() << "\n";
      }
    }
  }
  std::vector<KbEntry> out;
  out.reserve(deduped.size());
  for (auto& [key, entry] : deduped) out.push_back(std::move(entry));
  return out;
}

namespace {

void exec_or_throw(sqlite3* db, const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string message = err ? err : "unknown sqlite error";
    sqlite3_free(err);
    throw DataError("sqlite: " + message);
  }
}

KbEntry read_row(sqlite3_stmt* stmt) {
  auto text = [&](int col) {
    const unsigned char* s = sqlite3_column_text(stmt, col);
    return s ? std::string(reinterpret_cast<const char*>(s)) : std::string();
  };
  KbEntry e;
  e.rrid = text(0);
  e.article_id = text(1);
  e.specificity = label_from_name(text(2));
  e.evidence = text(3);
  e.spec_probs(0) = sqlite3_column_double(stmt, 4);
  e.spec_probs(1) = sqlite3_column_double(stmt, 5);
  e.spec_probs(2) = sqlite3_column_double(stmt, 6);
  e.link_score = sqlite3_column_double(stmt, 7);
  e.created_at = text(8);
  return e;
}

constexpr const char* kSelectColumns =
    "rrid, article_id, specificity, evidence, prob_nonspecific, prob_neutral, "
    "prob_specific, link_score, created_at";

}  // namespace

KbStore::KbStore(const std::string& path) {
  if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
    std::string message = db_ ? sqlite3_errmsg(db_) : "cannot open";
    if (db_) sqlite3_close(db_);
    throw DataError("sqlite: cannot open " + path + ": " + message);
  }
  exec_or_throw(db_,
                "CREATE TABLE IF NOT EXISTS kb_entries ("
                " rrid TEXT NOT NULL,"
                " article_id TEXT NOT NULL,"
                " evidence_hash TEXT NOT NULL,"
                " specificity TEXT NOT NULL,"
                " evidence TEXT NOT NULL,"
                " prob_nonspecific REAL,"
                " prob_neutral REAL,"
                " prob_specific REAL,"
                " link_score REAL,"
                " created_at TEXT,"
                " PRIMARY KEY (rrid, article_id, evidence_hash))");
}

KbStore::~KbStore() {
  if (db_) sqlite3_close(db_);
}

int KbStore::insert(const std::vector<KbEntry>& entries) {
  const char* sql =
      "INSERT OR IGNORE INTO kb_entries (rrid, article_id, evidence_hash,"
      " specificity, evidence, prob_nonspecific, prob_neutral, prob_specific,"
      " link_score, created_at) VALUES (?,?,?,?,?,?,?,?,?,?)";
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql, -1, &stmt, nullptr) != SQLITE_OK)
    throw DataError(std::string("sqlite: ") + sqlite3_errmsg(db_));
  int inserted = 0;
  exec_or_throw(db_, "BEGIN");
  for (const KbEntry& e : entries) {
    if (e.specificity == SpecificityLabel::Neutral)
      throw DataError("neutral entries must not be stored");
    sqlite3_reset(stmt);
    std::string hash = e.evidence_hash();
    sqlite3_bind_text(stmt, 1, e.rrid.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(stmt, 2, e.article_id.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(stmt, 3, hash.c_str(), -1, SQLITE_TRANSIENT);
    std::string label = label_name(e.specificity);
    sqlite3_bind_text(stmt, 4, label.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(stmt, 5, e.evidence.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_double(stmt, 6, e.spec_probs(0));
    sqlite3_bind_double(stmt, 7, e.spec_probs(1));
    sqlite3_bind_double(stmt, 8, e.spec_probs(2));
    sqlite3_bind_double(stmt, 9, e.link_score);
    sqlite3_bind_text(stmt, 10, e.created_at.c_str(), -1, SQLITE_TRANSIENT);
    if (sqlite3_step(stmt) != SQLITE_DONE) {
      std::string message = sqlite3_errmsg(db_);
      sqlite3_finalize(stmt);
      exec_or_throw(db_, "ROLLBACK");
      throw DataError("sqlite: insert failed: " + message);
    }
    inserted += sqlite3_changes(db_);
  }
  sqlite3_finalize(stmt);
  exec_or_throw(db_, "COMMIT");
  return inserted;
}

std::vector<KbEntry> KbStore::query(const std::string& rrid) const {
  std::string normalized = normalize_rrid(rrid);  // throws on malformed input
  std::string sql = std::string("SELECT ") + kSelectColumns +
                    " FROM kb_entries WHERE rrid = ?"
                    " ORDER BY (specificity != 'Nonspecific'), article_id,"
                    " evidence_hash";
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
    throw DataError(std::string("sqlite: ") + sqlite3_errmsg(db_));
  sqlite3_bind_text(stmt, 1, normalized.c_str(), -1, SQLITE_TRANSIENT);
  std::vector<KbEntry> out;
  while (sqlite3_step(stmt) == SQLITE_ROW) out.push_back(read_row(stmt));
  sqlite3_finalize(stmt);
  return out;
}

std::vector<KbEntry> KbStore::all() const {
  std::string sql = std::string("SELECT ") + kSelectColumns +
                    " FROM kb_entries ORDER BY rrid, article_id, evidence_hash";
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
    throw DataError(std::string("sqlite: ") + sqlite3_errmsg(db_));
  std::vector<KbEntry> out;
  while (sqlite3_step(stmt) == SQLITE_ROW) out.push_back(read_row(stmt));
  sqlite3_finalize(stmt);
  return out;
}

void KbStore::export_jsonl(const std::string& path) const {
  std::ostringstream os;
  for (const KbEntry& e : all()) os << kb_entry_to_json(e).dump() << "\n";
  write_file(path, os.str());
}

std::string format_alert(const KbEntry& entry) {
  std::ostringstream os;
  os << "ALERT: RRID:" << entry.rrid << " reported "
     << label_name(entry.specificity) << " in " << entry.article_id << "\n"
     << "  link score " << entry.link_score << ", class probabilities ["
     << entry.spec_probs(0) << ", " << entry.spec_probs(1) << ", "
     << entry.spec_probs(2) << "]\n"
     << "  evidence: \"" << entry.evidence << "\"\n";
  return os.str();
}

}  // namespace abspec
