#pragma once

#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace linkrec {

// Strips issue-tracker tags ("#123", "JIRA-456") from free text.
// Each match is replaced by a single space; afterwards runs of spaces/tabs
// collapse to one space, spaces next to line breaks are dropped and the text
// is trimmed. Line structure is preserved. Scrubbing is idempotent.
class TagScrubber {
 public:
  // `#<digits>` and `<UPPERCASE-KEY>-<digits>`.
  static const std::vector<std::string>& default_patterns();

  TagScrubber();
  // Throws InvalidPattern for an empty list or a regex that fails to compile.
  explicit TagScrubber(const std::vector<std::string>& patterns);

  std::string operator()(std::string_view text) const;

 private:
  std::vector<std::regex> patterns_;
};

std::string scrub_issue_tags(std::string_view text, const std::vector<std::string>& patterns);

// Collapses horizontal whitespace and trims, keeping line breaks.
std::string normalize_whitespace(std::string_view text);

}  // namespace linkrec
