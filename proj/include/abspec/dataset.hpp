#pragma once

#include <optional>
#include <string>
#include <vector>

namespace abspec {

enum class SpecificityLabel { Nonspecific = 0, Neutral = 1, Specific = 2 };

std::string label_name(SpecificityLabel label);
// Accepts the canonical names plus the polarity aliases
// negative/neutral/positive, case-insensitive.
SpecificityLabel label_from_name(const std::string& name);

struct LabeledSnippet {
  std::string text;
  std::string aspect;
  SpecificityLabel label;
};

struct LabeledPair {
  std::string spec_text;
  std::string rrid_text;
  bool link = false;
  std::optional<SpecificityLabel> specificity;
};

// JSON-lines: {"text": str, "aspect": str, "label": str}
std::vector<LabeledSnippet> load_snippet_dataset(const std::string& path);
// JSON-lines: {"spec_snippet": str, "rrid_snippet": str,
//              "link": "yes"|"no", "specificity": str (optional)}
std::vector<LabeledPair> load_pair_dataset(const std::string& path);

}  // namespace abspec
