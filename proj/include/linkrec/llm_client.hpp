#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "linkrec/error.hpp"

namespace linkrec {

struct TokenUsage {
  std::size_t input_tokens = 0;
  std::size_t output_tokens = 0;
  // True when counts come from the whitespace proxy rather than the service.
  bool estimated = false;

  TokenUsage& operator+=(const TokenUsage& other) {
    input_tokens += other.input_tokens;
    output_tokens += other.output_tokens;
    estimated = estimated || other.estimated;
    return *this;
  }
};

// Whitespace-separated token count, used as a usage proxy.
std::size_t whitespace_token_count(std::string_view text);

struct LlmResponse {
  std::string text;
  TokenUsage usage;
};

// Transient failure (network error, 408/429/5xx). Callers may retry.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error(ErrorCode::ClientFailure, message) {}
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string name() const = 0;
  // Throws TransportError for retryable faults, Error(ClientFailure) otherwise.
  virtual LlmResponse complete(const std::string& prompt) const = 0;
};

// Answers with the candidate ids of a rerank prompt in their given order.
class EchoClient final : public LlmClient {
 public:
  std::string name() const override { return "echo"; }
  LlmResponse complete(const std::string& prompt) const override;
};

// Answers with the candidate ids of a rerank prompt reversed.
class ReverseClient final : public LlmClient {
 public:
  std::string name() const override { return "reverse"; }
  LlmResponse complete(const std::string& prompt) const override;
};

// Always answers in prose, never in the requested format.
class MalformedClient final : public LlmClient {
 public:
  std::string name() const override { return "malformed"; }
  LlmResponse complete(const std::string& prompt) const override;
};

// Canned responses keyed by the SHA-256 hex digest of the prompt. The file
// is a JSON object {digest: response}. Unknown prompts get an empty answer.
class ScriptedClient final : public LlmClient {
 public:
  explicit ScriptedClient(std::map<std::string, std::string> responses);
  static ScriptedClient from_file(const std::string& path);

  std::string name() const override { return "scripted"; }
  LlmResponse complete(const std::string& prompt) const override;

 private:
  std::map<std::string, std::string> responses_;
};

struct RemoteLlmConfig {
  std::string endpoint;
  std::string model;
  std::chrono::seconds timeout{120};
  std::string api_key_env = "LINKREC_LLM_API_KEY";
};

// Chat-completion style endpoint: one user message in, one text answer out.
// Temperature is left at the service default.
class RemoteLlmClient final : public LlmClient {
 public:
  explicit RemoteLlmClient(RemoteLlmConfig config);

  std::string name() const override { return "remote:" + config_.model; }
  LlmResponse complete(const std::string& prompt) const override;

 private:
  RemoteLlmConfig config_;
  std::string api_key_;
};

// `echo`, `reverse`, `malformed` or `scripted:<file>`.
std::unique_ptr<LlmClient> make_stub_client(const std::string& spec);

}  // namespace linkrec
