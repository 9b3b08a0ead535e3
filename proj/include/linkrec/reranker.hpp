#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "linkrec/llm_client.hpp"
#include "linkrec/ranking.hpp"
#include "linkrec/records.hpp"
#include "linkrec/retry.hpp"

namespace linkrec {

inline constexpr std::size_t kDefaultRerankK = 10;
inline constexpr std::size_t kMaxRerankK = 20;
inline constexpr const char* kPromptTemplateVersion = "rerank-v1";
inline constexpr std::size_t kPromptTokenBudget = 3000;

struct RerankCandidate {
  std::string commit_id;
  std::string message;
};

struct RerankRequest {
  IssueRecord issue;
  std::vector<RerankCandidate> candidates;
  std::string prompt_text;
  std::string format_instructions;
};

struct PromptOptions {
  std::size_t max_candidates = kMaxRerankK;
  // Longer commit messages are cut at this many bytes (0 = no limit).
  std::size_t max_message_bytes = 2000;
  // Whitespace-token ceiling for the whole prompt (0 = none). Messages are
  // cut shorter until the prompt fits; issue text is never cut.
  std::size_t token_budget = kPromptTokenBudget;
};

// Task statement, issue summary, issue description, numbered candidates
// ("<n>. commit <id>" followed by the indented message), then the required
// output format. Throws EmptyCandidates, TooManyCandidates.
RerankRequest build_prompt(const IssueRecord& issue, const std::vector<RerankCandidate>& candidates,
                           const PromptOptions& options = {});

// Commit ids listed in the candidate section of a prompt built by
// build_prompt, in listed order.
std::vector<std::string> candidate_ids_in_prompt(const std::string& prompt);

// Parses a reranked id list. Lenient mode repairs a JSON array of strings:
// unknown ids are dropped, duplicates keep their first position, missing ids
// are appended in original order. Strict mode accepts only an exact
// permutation. Returns nullopt (fallback) for anything else.
std::optional<std::vector<std::string>> parse_rerank_response(
    const std::string& response_text, const std::vector<std::string>& original_ids,
    bool strict = false);

struct RerankOptions {
  std::size_t k = kDefaultRerankK;
  bool strict = false;
  // Three attempts in total; only transport errors are retried.
  RetryPolicy retry{3, std::chrono::milliseconds(1000), std::chrono::milliseconds(16000), 2.0};
  PromptOptions prompt{};
};

struct RerankOutcome {
  RankedList list;
  bool fallback = false;
  // "format" when the answer could not be parsed, "client" when the client
  // failed after retries; empty otherwise.
  std::string fallback_reason;
  TokenUsage usage;
  unsigned attempts = 0;
};

// Reorders the top-k block of `retrieval` per the model's answer. Entries
// past k keep their order; scores are carried over from retrieval. Falls
// back to the retrieval order on malformed output or client failure.
RerankOutcome rerank(const LlmClient& client, const IssueRecord& issue, const RankedList& retrieval,
                     const std::map<std::string, std::string>& commit_messages,
                     const RerankOptions& options = {});

struct RateLimit {
  // 0 disables request spacing.
  double requests_per_minute = 0.0;
  std::size_t max_in_flight = 1;
};

// rerank() over many issues, concurrently within `limit`. Results are in
// input order. `issues` must contain every list's issue id.
std::vector<RerankOutcome> rerank_all(const LlmClient& client,
                                      const std::map<std::string, IssueRecord>& issues,
                                      const std::vector<RankedList>& retrieval,
                                      const std::map<std::string, std::string>& commit_messages,
                                      const RerankOptions& options, const RateLimit& limit);

struct Pricing {
  double input_per_token = 0.0;
  double output_per_token = 0.0;

  static Pricing per_million(double input, double output) { return {input / 1e6, output / 1e6}; }
};

// $5 per million input tokens, $20 per million output tokens.
inline const Pricing kReferencePricing = Pricing::per_million(5.0, 20.0);

struct CostEstimate {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  double unit_price_in = 0.0;
  double unit_price_out = 0.0;
  double total = 0.0;
};

// Throws InvalidArgument for negative prices.
CostEstimate estimate_cost(const TokenUsage& usage, const Pricing& pricing);
// Sum of per-issue estimates.
CostEstimate aggregate_cost(const std::vector<CostEstimate>& per_issue);

}  // namespace linkrec
