#include "linkrec/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <thread>

#include "linkrec/error.hpp"
#include "linkrec/http.hpp"

namespace linkrec {

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

StubEmbedder::StubEmbedder(std::size_t dimension, std::size_t ngram)
    : dimension_(dimension), ngram_(ngram) {
  if (dimension_ == 0 || ngram_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "stub embedder needs positive dimension and n");
  }
}

std::string StubEmbedder::name() const {
  return "stub-ngram" + std::to_string(ngram_) + "-d" + std::to_string(dimension_);
}

EmbeddingVector StubEmbedder::embed_text(std::string_view text) const {
  EmbeddingVector v(dimension_, 0.0);
  auto add = [&](std::string_view gram) {
    const auto h = fnv1a(gram);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[(h & 0x7fffffffffffffffULL) % dimension_] += sign;
  };
  if (text.size() < ngram_) {
    if (!text.empty()) add(text);
  } else {
    for (std::size_t i = 0; i + ngram_ <= text.size(); ++i) add(text.substr(i, ngram_));
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    // Empty text, or grams that cancel exactly: fixed guard vector.
    v[0] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<EmbeddingVector> StubEmbedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::ConfigInvalid, "embedding endpoint is empty");
  if (config_.dimension == 0 || config_.batch_size == 0 || config_.max_in_flight == 0) {
    throw Error(ErrorCode::ConfigInvalid, "embedding dimension, batch size and in-flight limit must be positive");
  }
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::vector<EmbeddingVector> RemoteEmbedder::request_batch(const std::vector<std::string>& texts) const {
  const std::string body = dump_json(Json(texts));
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;

  HttpResponse response;
  for (unsigned attempt = 1;; ++attempt) {
    response = http_post_json(config_.endpoint, body, headers, config_.timeout);
    if (response.status >= 200 && response.status < 300) break;
    if (!is_retryable_status(response.status) || attempt >= config_.retry.max_attempts) {
      throw Error(ErrorCode::ProviderFailure,
                  "embedding request failed after " + std::to_string(attempt) + " attempt(s): status " +
                      std::to_string(response.status) + " " + response.body.substr(0, 200));
    }
    std::this_thread::sleep_for(config_.retry.delay_before(attempt));
  }

  std::vector<EmbeddingVector> vectors;
  try {
    const auto parsed = Json::parse(response.body);
    vectors = parsed.get<std::vector<EmbeddingVector>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ProviderFailure, std::string("malformed embedding response: ") + e.what());
  }
  if (vectors.size() != texts.size()) {
    throw Error(ErrorCode::ProviderFailure, "embedding response has " + std::to_string(vectors.size()) +
                                                " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != config_.dimension) {
      throw Error(ErrorCode::ProviderFailure, "embedding of dimension " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(config_.dimension));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw Error(ErrorCode::ProviderFailure, "non-finite embedding value");
    }
  }
  return vectors;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) const {
  std::vector<std::vector<std::string>> batches;
  for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
    const auto end = std::min(texts.size(), i + config_.batch_size);
    batches.emplace_back(texts.begin() + static_cast<long>(i), texts.begin() + static_cast<long>(end));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  // Waves of at most max_in_flight concurrent requests, gathered in order.
  for (std::size_t start = 0; start < batches.size(); start += config_.max_in_flight) {
    const auto stop = std::min(batches.size(), start + config_.max_in_flight);
    std::vector<std::future<std::vector<EmbeddingVector>>> wave;
    for (std::size_t b = start; b < stop; ++b) {
      wave.push_back(std::async(std::launch::async, [this, &batches, b] { return request_batch(batches[b]); }));
    }
    for (auto& f : wave) {
      for (auto& v : f.get()) out.push_back(std::move(v));
    }
  }
  return out;
}

std::string issue_text(const IssueRecord& issue) {
  if (issue.description.empty()) return issue.summary;
  return issue.summary + " " + issue.description;
}

EmbeddingVector embed_issue(const EmbeddingProvider& provider, const IssueRecord& issue) {
  return provider.embed(issue_text(issue));
}

}  // namespace linkrec
