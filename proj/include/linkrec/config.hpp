#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linkrec/dataset.hpp"
#include "linkrec/embedding.hpp"
#include "linkrec/llm_client.hpp"
#include "linkrec/metrics.hpp"
#include "linkrec/reranker.hpp"

namespace linkrec {

struct EmbeddingConfig {
  std::string type = "stub";  // "stub" | "remote"
  std::size_t dimension = kDefaultEmbeddingDimension;
  std::size_t ngram = 3;
  RemoteEmbedderConfig remote;
};

struct LlmClientConfig {
  // Stub spec (`echo`, `reverse`, `malformed`, `scripted:<file>`), or
  // "remote" to use `remote`.
  std::string spec = "echo";
  RemoteLlmConfig remote;
};

struct RerankConfig {
  bool enabled = true;
  std::size_t k = kDefaultRerankK;
  bool strict = false;
  LlmClientConfig client;
  RateLimit rate_limit;
  RetryPolicy retry{3, std::chrono::milliseconds(1000), std::chrono::milliseconds(16000), 2.0};
};

struct RunConfig {
  std::string project_name;
  std::string repo_path;
  std::string issues_file;
  std::string links_file;
  ConstructionMode mode = ConstructionMode::RDS;
  int epsilon_days = kDefaultEpsilonDays;
  std::size_t n_false = kDefaultFixedFalseLinks;
  std::size_t sample_cap = kDefaultSampleCap;
  SplitRatio split_ratio;
  std::optional<std::uint64_t> seed;
  EmbeddingConfig embedding;
  RerankConfig rerank;
  Pricing pricing = kReferencePricing;
  std::vector<std::size_t> ks = kDefaultCutoffs;
  std::vector<std::string> tag_patterns;
  bool include_file_contents = false;
  unsigned mine_jobs = 0;
  std::string output_dir;

  // The parsed document after interpolation and path resolution.
  Json snapshot;
};

// Replaces every `${NAME}` in string values with the environment variable
// NAME. Throws ConfigInvalid when a referenced variable is unset.
Json interpolate_environment(const Json& j);

// Parses and validates a config document. Relative paths resolve against
// `base_dir`. Throws ConfigInvalid.
RunConfig parse_config(const Json& document, const std::string& base_dir);
RunConfig load_config(const std::string& path);

}  // namespace linkrec
