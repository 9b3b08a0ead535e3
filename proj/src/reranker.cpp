#include "linkrec/reranker.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "linkrec/error.hpp"

namespace linkrec {

namespace {

constexpr const char* kCandidateHeader = "Candidate commits:\n";

const char* kTaskStatement =
    "You are helping recover missing links between issues and the commits that fix them. "
    "Below is an issue followed by candidate commits retrieved for it. Rerank the candidates "
    "by how likely each commit is to resolve the issue, judging from the issue text and the "
    "commit messages.";

const char* kFormatInstructions =
    "Output format: respond with only a JSON array of the candidate commit IDs listed above, "
    "as strings, ordered from most to least likely to fix the issue. Include every ID exactly "
    "once and do not add any other text.";

std::string truncate_utf8(const std::string& text, std::size_t max_bytes) {
  if (max_bytes == 0 || text.size() <= max_bytes) return text;
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return text.substr(0, cut) + " ...";
}

void append_indented(std::string& out, const std::string& text, const std::string& indent) {
  std::istringstream lines(text);
  std::string line;
  bool first = true;
  while (std::getline(lines, line)) {
    if (!first) out += indent;
    out += line;
    out += '\n';
    first = false;
  }
  if (first) out += '\n';
}

// Pulls the outermost JSON array out of a reply that may be wrapped in a code
// fence or a sentence.
std::optional<Json> extract_array(const std::string& text) {
  auto try_parse = [](const std::string& s) -> std::optional<Json> {
    try {
      auto j = Json::parse(s);
      if (j.is_array()) return j;
    } catch (const nlohmann::json::exception&) {
    }
    return std::nullopt;
  };
  if (auto j = try_parse(text)) return j;
  const auto open = text.find('[');
  const auto close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  return try_parse(text.substr(open, close - open + 1));
}

}  // namespace

RerankRequest build_prompt(const IssueRecord& issue, const std::vector<RerankCandidate>& candidates,
                           const PromptOptions& options) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "rerank prompt needs candidates");
  if (candidates.size() > options.max_candidates) {
    throw Error(ErrorCode::TooManyCandidates, std::to_string(candidates.size()) + " candidates, limit " +
                                                  std::to_string(options.max_candidates));
  }
  auto render = [&](std::size_t message_bytes) {
    std::string prompt = kTaskStatement;
    prompt += "\n\nIssue summary:\n";
    append_indented(prompt, issue.summary.empty() ? "(none)" : issue.summary, "");
    prompt += "\nIssue description:\n";
    append_indented(prompt, issue.description.empty() ? "(none)" : issue.description, "");
    prompt += "\n";
    prompt += kCandidateHeader;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      prompt += std::to_string(i + 1) + ". commit " + candidates[i].commit_id + "\n   message: ";
      append_indented(prompt, truncate_utf8(candidates[i].message, message_bytes), "   ");
    }
    prompt += "\n";
    prompt += kFormatInstructions;
    prompt += "\n";
    return prompt;
  };
  std::size_t message_bytes = options.max_message_bytes;
  std::string prompt = render(message_bytes);
  while (options.token_budget != 0 && whitespace_token_count(prompt) > options.token_budget) {
    message_bytes = message_bytes == 0 ? 1024 : message_bytes / 2;
    if (message_bytes < 32) break;
    prompt = render(message_bytes);
  }
  return {issue, candidates, std::move(prompt), kFormatInstructions};
}

std::vector<std::string> candidate_ids_in_prompt(const std::string& prompt) {
  std::vector<std::string> ids;
  const auto header = prompt.rfind(std::string("\n") + kCandidateHeader);
  if (header == std::string::npos) return ids;
  static const std::regex line_re(R"(^[0-9]+\. commit (\S+)$)");
  std::istringstream lines(prompt.substr(header + 1 + std::char_traits<char>::length(kCandidateHeader)));
  std::string line;
  std::smatch m;
  while (std::getline(lines, line)) {
    if (std::regex_match(line, m, line_re)) ids.push_back(m[1].str());
  }
  return ids;
}

std::optional<std::vector<std::string>> parse_rerank_response(
    const std::string& response_text, const std::vector<std::string>& original_ids, bool strict) {
  const auto array = extract_array(response_text);
  if (!array) return std::nullopt;
  std::vector<std::string> given;
  for (const auto& item : *array) {
    if (!item.is_string()) return std::nullopt;
    given.push_back(item.get<std::string>());
  }

  const std::set<std::string> known(original_ids.begin(), original_ids.end());
  if (strict) {
    const std::set<std::string> given_set(given.begin(), given.end());
    if (given.size() != original_ids.size() || given_set != known) return std::nullopt;
    return given;
  }

  std::vector<std::string> order;
  std::set<std::string> placed;
  for (const auto& id : given) {
    if (known.count(id) != 0 && placed.insert(id).second) order.push_back(id);
  }
  for (const auto& id : original_ids) {
    if (placed.insert(id).second) order.push_back(id);
  }
  return order;
}

RerankOutcome rerank(const LlmClient& client, const IssueRecord& issue, const RankedList& retrieval,
                     const std::map<std::string, std::string>& commit_messages,
                     const RerankOptions& options) {
  if (retrieval.ranking.empty()) throw Error(ErrorCode::EmptyCandidates, "empty retrieval list for " + issue.issue_id);
  if (options.k == 0 || options.k > options.prompt.max_candidates) {
    throw Error(ErrorCode::TooManyCandidates, "rerank k=" + std::to_string(options.k) +
                                                  " outside [1, " + std::to_string(options.prompt.max_candidates) + "]");
  }

  const std::size_t top = std::min(options.k, retrieval.ranking.size());
  std::vector<RerankCandidate> candidates;
  std::vector<std::string> top_ids;
  for (std::size_t i = 0; i < top; ++i) {
    const auto& id = retrieval.ranking[i].commit_id;
    auto it = commit_messages.find(id);
    candidates.push_back({id, it == commit_messages.end() ? std::string() : it->second});
    top_ids.push_back(id);
  }
  const auto request = build_prompt(issue, candidates, options.prompt);

  RerankOutcome outcome;
  outcome.list = retrieval;
  outcome.list.issue_id = issue.issue_id;
  outcome.list.stage = RankingStage::RERANKED;

  std::optional<LlmResponse> response;
  for (unsigned attempt = 1; attempt <= std::max(1u, options.retry.max_attempts); ++attempt) {
    outcome.attempts = attempt;
    try {
      response = client.complete(request.prompt_text);
      break;
    } catch (const TransportError&) {
      if (attempt < options.retry.max_attempts) {
        std::this_thread::sleep_for(options.retry.delay_before(attempt));
      }
    } catch (const Error&) {
      break;  // non-transient client failure: no retry
    }
  }
  if (!response) {
    outcome.fallback = true;
    outcome.fallback_reason = "client";
    return outcome;
  }
  outcome.usage = response->usage;

  const auto order = parse_rerank_response(response->text, top_ids, options.strict);
  if (!order) {
    outcome.fallback = true;
    outcome.fallback_reason = "format";
    return outcome;
  }
  std::map<std::string, double> score_of;
  for (std::size_t i = 0; i < top; ++i) score_of[retrieval.ranking[i].commit_id] = retrieval.ranking[i].score;
  for (std::size_t i = 0; i < top; ++i) {
    outcome.list.ranking[i] = {(*order)[i], score_of.at((*order)[i])};
  }
  return outcome;
}

std::vector<RerankOutcome> rerank_all(const LlmClient& client,
                                      const std::map<std::string, IssueRecord>& issues,
                                      const std::vector<RankedList>& retrieval,
                                      const std::map<std::string, std::string>& commit_messages,
                                      const RerankOptions& options, const RateLimit& limit) {
  for (const auto& list : retrieval) {
    if (issues.count(list.issue_id) == 0) {
      throw Error(ErrorCode::MissingIssueMetadata, "no issue record for " + list.issue_id);
    }
  }
  std::vector<std::optional<RerankOutcome>> results(retrieval.size());
  std::vector<std::exception_ptr> errors(retrieval.size());
  std::atomic<std::size_t> next{0};

  std::mutex clock_mutex;
  auto next_slot = std::chrono::steady_clock::now();
  const auto spacing = limit.requests_per_minute > 0
                           ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                 std::chrono::duration<double>(60.0 / limit.requests_per_minute))
                           : std::chrono::steady_clock::duration::zero();

  auto worker = [&] {
    for (auto i = next++; i < retrieval.size(); i = next++) {
      if (spacing.count() > 0) {
        std::chrono::steady_clock::time_point slot;
        {
          std::lock_guard<std::mutex> lock(clock_mutex);
          slot = std::max(next_slot, std::chrono::steady_clock::now());
          next_slot = slot + spacing;
        }
        std::this_thread::sleep_until(slot);
      }
      try {
        results[i] = rerank(client, issues.at(retrieval[i].issue_id), retrieval[i], commit_messages, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads_wanted = std::max<std::size_t>(1, std::min(limit.max_in_flight, retrieval.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < threads_wanted; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::vector<RerankOutcome> out;
  out.reserve(retrieval.size());
  for (std::size_t i = 0; i < retrieval.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

CostEstimate estimate_cost(const TokenUsage& usage, const Pricing& pricing) {
  if (pricing.input_per_token < 0 || pricing.output_per_token < 0) {
    throw Error(ErrorCode::InvalidArgument, "token prices must be nonnegative");
  }
  CostEstimate c;
  c.input_tokens = usage.input_tokens;
  c.output_tokens = usage.output_tokens;
  c.unit_price_in = pricing.input_per_token;
  c.unit_price_out = pricing.output_per_token;
  c.total = static_cast<double>(usage.input_tokens) * pricing.input_per_token +
            static_cast<double>(usage.output_tokens) * pricing.output_per_token;
  return c;
}

CostEstimate aggregate_cost(const std::vector<CostEstimate>& per_issue) {
  CostEstimate sum;
  for (const auto& c : per_issue) {
    sum.input_tokens += c.input_tokens;
    sum.output_tokens += c.output_tokens;
    sum.total += c.total;
    sum.unit_price_in = c.unit_price_in;
    sum.unit_price_out = c.unit_price_out;
  }
  return sum;
}

}  // namespace linkrec
