#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace abspec {

// Half-open byte span into the source paragraph.
struct SentenceSpan {
  size_t begin = 0;
  size_t end = 0;
};

// Rule-based splitter: a sentence ends at a run of [.?!] followed by
// whitespace and an uppercase letter or digit, unless the word carrying the
// punctuation is a known abbreviation or a single capital initial. Spans are
// trimmed; together they cover every non-whitespace byte of the paragraph.
// Empty or all-whitespace input yields an empty list.
std::vector<SentenceSpan> split_sentence_spans(std::string_view paragraph);

std::vector<std::string> split_sentences(std::string_view paragraph);

// Lowercased final-word forms that never terminate a sentence.
const std::vector<std::string>& abbreviation_stoplist();

}  // namespace abspec
