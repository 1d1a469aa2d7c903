#include "abspec/sentence_split.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "abspec/utils.hpp"

namespace abspec {

const std::vector<std::string>& abbreviation_stoplist() {
  static const std::vector<std::string> list = {
      "fig.", "figs.", "cat.", "no.", "nos.", "vs.", "al.",
      "i.e.", "e.g.", "ca.", "approx.", "dr.", "ref.",
  };
  return list;
}

namespace {

bool is_terminal(char c) { return c == '.' || c == '?' || c == '!'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

// Word ending at `end` (exclusive), scanning back to the previous whitespace.
std::string_view word_ending_at(std::string_view s, size_t end) {
  size_t b = end;
  while (b > 0 && !is_space(s[b - 1])) --b;
  return s.substr(b, end - b);
}

bool is_abbreviation(std::string_view word) {
  static const std::unordered_set<std::string> set(abbreviation_stoplist().begin(),
                                                   abbreviation_stoplist().end());
  // drop opening brackets/quotes so "(Cat." matches "cat."
  while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word[0])))
    word.remove_prefix(1);
  if (word.empty()) return false;
  if (set.count(lowercase(word))) return true;
  // single capital initial, e.g. "A." in "John A. Smith"
  if (word.size() == 2 && std::isupper(static_cast<unsigned char>(word[0])) &&
      word[1] == '.')
    return true;
  return false;
}

}  // namespace

std::vector<SentenceSpan> split_sentence_spans(std::string_view paragraph) {
  std::vector<size_t> cuts;  // index just past each sentence terminator
  const size_t n = paragraph.size();
  size_t i = 0;
  while (i < n) {
    if (!is_terminal(paragraph[i])) {
      ++i;
      continue;
    }
    size_t run_end = i;
    while (run_end + 1 < n && is_terminal(paragraph[run_end + 1])) ++run_end;
    size_t j = run_end + 1;
    while (j < n && is_space(paragraph[j])) ++j;
    bool followed_by_gap = j > run_end + 1;
    bool next_starts_sentence =
        j < n && (std::isupper(static_cast<unsigned char>(paragraph[j])) ||
                  std::isdigit(static_cast<unsigned char>(paragraph[j])));
    if (followed_by_gap && next_starts_sentence &&
        !is_abbreviation(word_ending_at(paragraph, run_end + 1))) {
      cuts.push_back(run_end + 1);
    }
    i = run_end + 1;
  }
  cuts.push_back(n);

  std::vector<SentenceSpan> spans;
  size_t start = 0;
  for (size_t cut : cuts) {
    size_t b = start, e = cut;
    while (b < e && is_space(paragraph[b])) ++b;
    while (e > b && is_space(paragraph[e - 1])) --e;
    if (e > b) spans.push_back({b, e});
    start = cut;
  }
  return spans;
}

std::vector<std::string> split_sentences(std::string_view paragraph) {
  std::vector<std::string> out;
  for (const SentenceSpan& sp : split_sentence_spans(paragraph))
    out.emplace_back(paragraph.substr(sp.begin, sp.end - sp.begin));
  return out;
}

}  // namespace abspec
