#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "linkrec/records.hpp"
#include "linkrec/retry.hpp"

namespace linkrec {

using EmbeddingVector = std::vector<double>;

inline constexpr std::size_t kDefaultEmbeddingDimension = 384;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  // One vector per input text, in input order. Throws ProviderFailure.
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const = 0;

  EmbeddingVector embed(const std::string& text) const { return embed_batch({text}).front(); }
};

// Offline deterministic provider: signed feature hashing of character
// n-grams, L2-normalized. A pure function of the input bytes.
class StubEmbedder final : public EmbeddingProvider {
 public:
  explicit StubEmbedder(std::size_t dimension = kDefaultEmbeddingDimension, std::size_t ngram = 3);

  std::string name() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;

  EmbeddingVector embed_text(std::string_view text) const;

 private:
  std::size_t dimension_;
  std::size_t ngram_;
};

struct RemoteEmbedderConfig {
  std::string endpoint;
  std::string model_name = "remote";
  std::size_t dimension = kDefaultEmbeddingDimension;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  std::chrono::seconds timeout{60};
  RetryPolicy retry{};
  std::string api_key_env = "LINKREC_EMBED_API_KEY";
};

// Hosted embedding service. Request body is a JSON array of strings; the
// response is a JSON array of float arrays of the configured dimension.
// Transport failures and 408/429/5xx are retried with backoff (at most three
// retries), everything else fails immediately with ProviderFailure.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderConfig config);

  std::string name() const override { return config_.model_name; }
  std::size_t dimension() const override { return config_.dimension; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) const override;

 private:
  std::vector<EmbeddingVector> request_batch(const std::vector<std::string>& texts) const;

  RemoteEmbedderConfig config_;
  std::string api_key_;
};

// Summary, a single space, then the description (summary alone when the
// description is empty).
std::string issue_text(const IssueRecord& issue);
EmbeddingVector embed_issue(const EmbeddingProvider& provider, const IssueRecord& issue);

}  // namespace linkrec
