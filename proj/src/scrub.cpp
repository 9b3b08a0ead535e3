#include "linkrec/scrub.hpp"

#include "linkrec/error.hpp"

namespace linkrec {

const std::vector<std::string>& TagScrubber::default_patterns() {
  static const std::vector<std::string> patterns = {
      R"(#[0-9]+)",
      R"(\b[A-Z][A-Z0-9_]+-[0-9]+\b)",
  };
  return patterns;
}

TagScrubber::TagScrubber() : TagScrubber(default_patterns()) {}

TagScrubber::TagScrubber(const std::vector<std::string>& patterns) {
  if (patterns.empty()) throw Error(ErrorCode::InvalidPattern, "no tag patterns given");
  for (const auto& p : patterns) {
    try {
      patterns_.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error(ErrorCode::InvalidPattern, "'" + p + "': " + e.what());
    }
  }
}

std::string TagScrubber::operator()(std::string_view text) const {
  std::string out(text);
  for (const auto& re : patterns_) out = std::regex_replace(out, re, " ");
  return normalize_whitespace(out);
}

std::string scrub_issue_tags(std::string_view text, const std::vector<std::string>& patterns) {
  return TagScrubber(patterns)(text);
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char raw : text) {
    const char ch = raw;
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f') {
      pending_space = true;
      continue;
    }
    if (ch == '\n') {
      out += '\n';
      pending_space = false;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != '\n') out += ' ';
    pending_space = false;
    out += ch;
  }
  const auto first = out.find_first_not_of('\n');
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of('\n');
  return out.substr(first, last - first + 1);
}

}  // namespace linkrec
