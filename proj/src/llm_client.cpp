#include "linkrec/llm_client.hpp"

#include <algorithm>
#include <cstdlib>

#include "linkrec/hashing.hpp"
#include "linkrec/http.hpp"
#include "linkrec/records.hpp"
#include "linkrec/reranker.hpp"

namespace linkrec {

namespace {

LlmResponse estimated(const std::string& prompt, std::string text) {
  LlmResponse r;
  r.usage = {whitespace_token_count(prompt), whitespace_token_count(text), true};
  r.text = std::move(text);
  return r;
}

}  // namespace

std::size_t whitespace_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

LlmResponse EchoClient::complete(const std::string& prompt) const {
  return estimated(prompt, dump_json(Json(candidate_ids_in_prompt(prompt))));
}

LlmResponse ReverseClient::complete(const std::string& prompt) const {
  auto ids = candidate_ids_in_prompt(prompt);
  std::reverse(ids.begin(), ids.end());
  return estimated(prompt, dump_json(Json(ids)));
}

LlmResponse MalformedClient::complete(const std::string& prompt) const {
  return estimated(prompt, "I think the first commit is the most likely fix for this issue.");
}

ScriptedClient::ScriptedClient(std::map<std::string, std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedClient ScriptedClient::from_file(const std::string& path) {
  const Json j = read_json_file(path);
  if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, path + ": scripted responses must be an object");
  std::map<std::string, std::string> responses;
  for (const auto& [digest, text] : j.items()) {
    if (!text.is_string()) throw Error(ErrorCode::ConfigInvalid, path + ": response for " + digest + " is not a string");
    responses[digest] = text.get<std::string>();
  }
  return ScriptedClient(std::move(responses));
}

LlmResponse ScriptedClient::complete(const std::string& prompt) const {
  auto it = responses_.find(sha256_hex(prompt));
  return estimated(prompt, it == responses_.end() ? std::string() : it->second);
}

RemoteLlmClient::RemoteLlmClient(RemoteLlmConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty() || config_.model.empty()) {
    throw Error(ErrorCode::ConfigInvalid, "remote LLM client needs an endpoint and a model");
  }
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

LlmResponse RemoteLlmClient::complete(const std::string& prompt) const {
  Json request;
  request["model"] = config_.model;
  request["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;

  const auto response = http_post_json(config_.endpoint, dump_json(request), headers, config_.timeout);
  if (is_retryable_status(response.status)) {
    throw TransportError("LLM request failed: status " + std::to_string(response.status) + " " +
                         response.body.substr(0, 200));
  }
  if (response.status < 200 || response.status >= 300) {
    throw Error(ErrorCode::ClientFailure, "LLM request rejected: status " +
                                              std::to_string(response.status) + " " +
                                              response.body.substr(0, 200));
  }

  // unexpected body shape -> empty answer, reranker falls back
  Json body;
  try {
    body = Json::parse(response.body);
  } catch (const nlohmann::json::exception&) {
    return estimated(prompt, "");
  }
  std::string text;
  if (auto choices = body.find("choices"); choices != body.end() && choices->is_array() &&
                                           !choices->empty()) {
    const auto& first = (*choices)[0];
    if (first.contains("message") && first["message"].contains("content") &&
        first["message"]["content"].is_string()) {
      text = first["message"]["content"].get<std::string>();
    }
  }
  LlmResponse out = estimated(prompt, text);
  if (auto usage = body.find("usage"); usage != body.end() && usage->is_object() &&
                                       usage->contains("prompt_tokens") &&
                                       usage->contains("completion_tokens")) {
    out.usage = {(*usage)["prompt_tokens"].get<std::size_t>(),
                 (*usage)["completion_tokens"].get<std::size_t>(), false};
  }
  return out;
}

std::unique_ptr<LlmClient> make_stub_client(const std::string& spec) {
  if (spec == "echo") return std::make_unique<EchoClient>();
  if (spec == "reverse") return std::make_unique<ReverseClient>();
  if (spec == "malformed") return std::make_unique<MalformedClient>();
  const std::string prefix = "scripted:";
  if (spec.rfind(prefix, 0) == 0) {
    return std::make_unique<ScriptedClient>(ScriptedClient::from_file(spec.substr(prefix.size())));
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown stub client '" + spec + "'");
}

}  // namespace linkrec
