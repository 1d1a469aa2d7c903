#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "abspec/article.hpp"
#include "abspec/dataset.hpp"
#include "abspec/errors.hpp"
#include "abspec/kb.hpp"
#include "abspec/protocols.hpp"
#include "abspec/utils.hpp"

using namespace abspec;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(ABSPEC_TEST_FIXTURES) + "/" + name;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

SpecificityModel fixture_spec_model() {
  auto data = load_snippet_dataset(fixture_path("task1_train.jsonl"));
  TrainConfig cfg = parse_train_config(fixture_path("task1_config.cfg"));
  return train_specificity(data, cfg);
}

LinkModel fixture_link_model() {
  auto data = load_pair_dataset(fixture_path("task2_train.jsonl"));
  TrainConfig cfg = parse_train_config(fixture_path("task2_config.cfg"));
  return train_link_model(data, cfg);
}

}  // namespace

TEST_SUITE_BEGIN("kb");

TEST_CASE("pipeline emits the expected triple for the fig-1 style fixture") {
  Article article =
      parse_article_json(read_file(fixture_path("articles/PMC6120938.json")));
  SpecificityModel spec_model = fixture_spec_model();
  LinkModel link_model = fixture_link_model();
  auto entries = run_pipeline(article, spec_model, link_model);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].rrid == "AB_2564652");
  CHECK(entries[0].specificity == SpecificityLabel::Nonspecific);
  CHECK(entries[0].evidence.find("6E10 antibody") != std::string::npos);
  CHECK(entries[0].article_id == "PMC6120938");
  CHECK(entries[0].link_score >= 0.5);
}

TEST_CASE("pipeline yields nothing without specificity snippets") {
  Article article = parse_article_json(R"({"article_id": "EMPTYISH", "sections": [
      {"title": "Methods", "paragraphs":
        ["The reagent RRID:AB_42 was used. Samples were processed."]}]})");
  auto entries = run_pipeline(article, fixture_spec_model(), fixture_link_model());
  CHECK(entries.empty());
}

TEST_CASE("one snippet linked to duplicate RRID mentions deduplicates") {
  Article article = parse_article_json(R"({"article_id": "DUP", "sections": [
      {"title": "Methods", "paragraphs": [
        "The probe RRID:AB_99 arrived Monday. A second aliquot of RRID:AB_99 arrived later."]},
      {"title": "Results", "paragraphs": [
        "Heavy non-specific bands were detected with the 6E10 antibody in all lanes."]}]})");
  SpecificityModel spec_model = fixture_spec_model();
  // overlap model with an empty dictionary links everything sharing a word
  auto dict = std::make_shared<WordList>(std::vector<std::string>{});
  LinkModel link_all = make_overlap_model(dict, 0.8);
  auto entries = run_pipeline(article, spec_model, link_all);
  REQUIRE(entries.size() == 1);  // two mentions of the same RRID collapse
  CHECK(entries[0].rrid == "AB_99");
}

TEST_CASE("store insert is idempotent and query orders Nonspecific first") {
  std::string path = temp_path("abspec_test_kb.sqlite");
  std::remove(path.c_str());
  KbStore store(path);
  KbEntry nonspec{"AB_1", SpecificityLabel::Nonspecific, "bad bands", "P1",
                  Eigen::Vector3d(0.8, 0.1, 0.1), 0.9, "2026-01-01T00:00:00Z"};
  KbEntry specific{"AB_1", SpecificityLabel::Specific, "clean bands", "P2",
                   Eigen::Vector3d(0.1, 0.1, 0.8), 0.8, "2026-01-01T00:00:00Z"};
  CHECK(store.insert({specific, nonspec}) == 2);
  CHECK(store.insert({specific}) == 0);  // same key again

  auto rows = store.query("AB_1");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].specificity == SpecificityLabel::Nonspecific);
  CHECK(rows[1].specificity == SpecificityLabel::Specific);
  CHECK(rows[0].evidence == "bad bands");
  CHECK(rows[0].spec_probs(0) == doctest::Approx(0.8));

  CHECK(store.query("RRID:AB_1").size() == 2);  // prefixed form accepted
  CHECK(store.query("AB_404").empty());
  CHECK_THROWS_AS(store.query("not-an-rrid"), DataError);

  KbEntry neutral = nonspec;
  neutral.specificity = SpecificityLabel::Neutral;
  neutral.evidence = "something else";
  CHECK_THROWS_AS(store.insert({neutral}), DataError);

  std::string exported = temp_path("abspec_test_kb.jsonl");
  store.export_jsonl(exported);
  std::string content = read_file(exported);
  CHECK(content.find("\"AB_1\"") != std::string::npos);
  CHECK(content.find("Nonspecific") != std::string::npos);
  std::remove(path.c_str());
  std::remove(exported.c_str());
}

TEST_CASE("alert text carries the triple") {
  KbEntry e{"AB_7", SpecificityLabel::Nonspecific, "ugly smear", "P9",
            Eigen::Vector3d(0.9, 0.05, 0.05), 0.7, "2026-01-01T00:00:00Z"};
  std::string alert = format_alert(e);
  CHECK(alert.find("RRID:AB_7") != std::string::npos);
  CHECK(alert.find("Nonspecific") != std::string::npos);
  CHECK(alert.find("ugly smear") != std::string::npos);
  CHECK(alert.find("P9") != std::string::npos);
}

TEST_CASE("cross-validation protocols run on the bundled fixtures") {
  auto snippets = load_snippet_dataset(fixture_path("task1_train.jsonl"));
  TrainConfig cfg = parse_train_config(fixture_path("task1_config.cfg"));
  cfg.epochs = 6;  // keep the protocol test quick
  CrossValResult task1 = eval_task1(snippets, cfg, 3);
  CHECK(task1.folds.size() == 3);
  CHECK(task1.pooled.classes.size() == 3);
  CHECK(task1.pooled.macro_f1 >= 0.0);
  CHECK(task1.fold_means.weighted_f1 >= 0.0);

  auto pairs = load_pair_dataset(fixture_path("task2_train.jsonl"));
  TrainConfig overlap_cfg;
  overlap_cfg.link_variant = "overlap";
  overlap_cfg.threshold = 1.0;
  overlap_cfg.dictionary = std::string(ABSPEC_DATA_DIR) + "/english_words.txt";
  CrossValResult task2 = eval_task2(pairs, overlap_cfg, 3);
  CHECK(task2.folds.size() == 3);
  CHECK(task2.pooled.has_accuracy);
  // the self-identifying fixture pairs are easy for the overlap baseline
  CHECK(task2.pooled.classes[0].metrics.f1 > 0.8);

  TrainConfig joint_cfg = parse_train_config(fixture_path("task1_config.cfg"));
  joint_cfg.epochs = 6;
  joint_cfg.link_variant = "overlap";
  joint_cfg.threshold = 1.0;
  joint_cfg.dictionary = std::string(ABSPEC_DATA_DIR) + "/english_words.txt";
  CrossValResult joint = eval_joint(pairs, joint_cfg, 3);
  CHECK(joint.folds.size() == 3);
  CHECK(joint.pooled.classes.size() == 3);
}

TEST_SUITE_END();
