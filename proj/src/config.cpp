#include "linkrec/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

#include "linkrec/error.hpp"
#include "linkrec/scrub.hpp"

namespace linkrec {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::ConfigInvalid, message); }

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    invalid(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.lexically_normal().string();
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (key == "api_key" || key == "apikey" || key == "token") {
      invalid(where + ": secrets are read from the environment, not the config ('" + key + "')");
    }
    if (known.count(key) == 0) invalid(where + ": unknown key '" + key + "'");
  }
}

EmbeddingConfig parse_embedding(const Json& j) {
  EmbeddingConfig e;
  if (j.is_string()) {
    e.type = j.get<std::string>();
  } else if (j.is_object()) {
    reject_unknown(j, {"type", "dimension", "ngram", "endpoint", "model", "batch_size", "max_in_flight",
                       "timeout_seconds", "max_retries"},
                   "embedding_provider");
    e.type = get_or<std::string>(j, "type", "stub");
    e.dimension = get_or<std::size_t>(j, "dimension", e.dimension);
    e.ngram = get_or<std::size_t>(j, "ngram", e.ngram);
    e.remote.endpoint = get_or<std::string>(j, "endpoint", "");
    e.remote.model_name = get_or<std::string>(j, "model", e.remote.model_name);
    e.remote.batch_size = get_or<std::size_t>(j, "batch_size", e.remote.batch_size);
    e.remote.max_in_flight = get_or<std::size_t>(j, "max_in_flight", e.remote.max_in_flight);
    e.remote.timeout = std::chrono::seconds(get_or<long>(j, "timeout_seconds", e.remote.timeout.count()));
    e.remote.retry.max_attempts = 1 + get_or<unsigned>(j, "max_retries", e.remote.retry.max_attempts - 1);
  } else if (!j.is_null()) {
    invalid("embedding_provider must be a string or an object");
  }
  if (e.type != "stub" && e.type != "remote") invalid("embedding_provider.type must be 'stub' or 'remote'");
  if (e.type == "remote" && e.remote.endpoint.empty()) invalid("remote embedding provider needs an endpoint");
  e.remote.dimension = e.dimension;
  if (e.dimension == 0) invalid("embedding dimension must be positive");
  return e;
}

LlmClientConfig parse_client(const Json& j) {
  LlmClientConfig c;
  if (j.is_string()) {
    c.spec = j.get<std::string>();
  } else if (j.is_object()) {
    reject_unknown(j, {"type", "endpoint", "model", "timeout_seconds", "file"}, "rerank.client");
    const auto type = get_or<std::string>(j, "type", "echo");
    if (type == "remote") {
      c.spec = "remote";
      c.remote.endpoint = get_or<std::string>(j, "endpoint", "");
      c.remote.model = get_or<std::string>(j, "model", "");
      c.remote.timeout = std::chrono::seconds(get_or<long>(j, "timeout_seconds", c.remote.timeout.count()));
      if (c.remote.endpoint.empty() || c.remote.model.empty()) invalid("remote LLM client needs endpoint and model");
    } else if (type == "scripted") {
      c.spec = "scripted:" + get_or<std::string>(j, "file", "");
    } else {
      c.spec = type;
    }
  } else if (!j.is_null()) {
    invalid("rerank.client must be a string or an object");
  }
  const bool known = c.spec == "echo" || c.spec == "reverse" || c.spec == "malformed" || c.spec == "remote" ||
                     c.spec.rfind("scripted:", 0) == 0;
  if (!known) invalid("unknown rerank client '" + c.spec + "'");
  if (c.spec == "scripted:") invalid("scripted client needs a response file");
  return c;
}

}  // namespace

Json interpolate_environment(const Json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const auto open = s.find("${", pos);
      if (open == std::string::npos) break;
      const auto close = s.find('}', open + 2);
      if (close == std::string::npos) break;
      const auto name = s.substr(open + 2, close - open - 2);
      const char* value = std::getenv(name.c_str());
      if (value == nullptr) invalid("environment variable '" + name + "' is not set");
      out += s.substr(pos, open - pos);
      out += value;
      pos = close + 1;
    }
    out += s.substr(pos);
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [k, v] : j.items()) out[k] = interpolate_environment(v);
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& v : j) out.push_back(interpolate_environment(v));
    return out;
  }
  return j;
}

RunConfig parse_config(const Json& document, const std::string& base_dir) {
  if (!document.is_object()) invalid("config must be a JSON object");
  const Json j = interpolate_environment(document);
  reject_unknown(j,
                 {"project_name", "repo_path", "issues_file", "links_file", "mode", "epsilon_days", "n_false",
                  "sample_cap", "split_ratio", "seed", "embedding_provider", "rerank", "pricing", "ks",
                  "tag_patterns", "include_file_contents", "mine_jobs", "output_dir"},
                 "config");
  RunConfig c;
  c.project_name = get_or<std::string>(j, "project_name", "");
  if (c.project_name.empty()) invalid("project_name is required");
  c.repo_path = resolve(get_or<std::string>(j, "repo_path", ""), base_dir);
  c.issues_file = resolve(get_or<std::string>(j, "issues_file", ""), base_dir);
  c.links_file = resolve(get_or<std::string>(j, "links_file", ""), base_dir);
  c.output_dir = resolve(get_or<std::string>(j, "output_dir", ""), base_dir);
  if (c.output_dir.empty()) invalid("output_dir is required");

  try {
    c.mode = construction_mode_from_string(get_or<std::string>(j, "mode", "RDS"));
  } catch (const Error& e) {
    invalid(e.what());
  }
  c.epsilon_days = get_or<int>(j, "epsilon_days", c.epsilon_days);
  if (c.epsilon_days < 1) invalid("epsilon_days must be >= 1");
  c.n_false = get_or<std::size_t>(j, "n_false", c.n_false);
  c.sample_cap = get_or<std::size_t>(j, "sample_cap", c.sample_cap);
  if (c.sample_cap < 1) invalid("sample_cap must be >= 1");
  if (j.contains("split_ratio")) {
    const auto ratio = get_or<std::vector<unsigned>>(j, "split_ratio", {});
    if (ratio.size() != 2 || ratio[0] + ratio[1] == 0) invalid("split_ratio must be [train, test]");
    c.split_ratio = {ratio[0], ratio[1]};
  }
  if (j.contains("seed") && !j["seed"].is_null()) c.seed = get_or<std::uint64_t>(j, "seed", 0);

  c.embedding = parse_embedding(j.contains("embedding_provider") ? j["embedding_provider"] : Json());

  if (j.contains("rerank")) {
    const auto& r = j["rerank"];
    if (!r.is_object()) invalid("rerank must be an object");
    reject_unknown(r, {"enabled", "k", "strict", "client", "rate_limit", "max_attempts", "backoff_ms"}, "rerank");
    c.rerank.enabled = get_or<bool>(r, "enabled", true);
    c.rerank.k = get_or<std::size_t>(r, "k", c.rerank.k);
    c.rerank.strict = get_or<bool>(r, "strict", false);
    c.rerank.client = parse_client(r.contains("client") ? r["client"] : Json());
    if (c.rerank.client.spec.rfind("scripted:", 0) == 0) {
      c.rerank.client.spec = "scripted:" + resolve(c.rerank.client.spec.substr(9), base_dir);
    }
    if (r.contains("rate_limit")) {
      const auto& rl = r["rate_limit"];
      reject_unknown(rl, {"requests_per_minute", "max_in_flight"}, "rerank.rate_limit");
      c.rerank.rate_limit.requests_per_minute = get_or<double>(rl, "requests_per_minute", 0.0);
      c.rerank.rate_limit.max_in_flight = get_or<std::size_t>(rl, "max_in_flight", 1);
      if (c.rerank.rate_limit.max_in_flight == 0 || c.rerank.rate_limit.requests_per_minute < 0) {
        invalid("rate_limit values must be positive");
      }
    }
    c.rerank.retry.max_attempts = get_or<unsigned>(r, "max_attempts", c.rerank.retry.max_attempts);
    c.rerank.retry.initial_delay =
        std::chrono::milliseconds(get_or<long>(r, "backoff_ms", c.rerank.retry.initial_delay.count()));
    if (c.rerank.retry.max_attempts == 0) invalid("rerank.max_attempts must be >= 1");
  }
  if (c.rerank.k < 1 || c.rerank.k > kMaxRerankK) {
    invalid("rerank.k must be in [1, " + std::to_string(kMaxRerankK) + "]");
  }

  if (j.contains("pricing")) {
    const auto& p = j["pricing"];
    reject_unknown(p, {"input_per_million", "output_per_million"}, "pricing");
    c.pricing = Pricing::per_million(get_or<double>(p, "input_per_million", 0.0),
                                     get_or<double>(p, "output_per_million", 0.0));
    if (c.pricing.input_per_token < 0 || c.pricing.output_per_token < 0) invalid("prices must be nonnegative");
  }
  c.ks = get_or<std::vector<std::size_t>>(j, "ks", c.ks);
  if (c.ks.empty()) invalid("ks must not be empty");
  for (auto k : c.ks) {
    if (k == 0) invalid("ks entries must be >= 1");
  }
  c.tag_patterns = get_or<std::vector<std::string>>(j, "tag_patterns", TagScrubber::default_patterns());
  c.include_file_contents = get_or<bool>(j, "include_file_contents", false);
  c.mine_jobs = get_or<unsigned>(j, "mine_jobs", 0);

  c.snapshot = j;
  for (const char* key : {"repo_path", "issues_file", "links_file", "output_dir"}) {
    if (c.snapshot.contains(key)) c.snapshot[key] = resolve(c.snapshot[key].get<std::string>(), base_dir);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  Json document;
  try {
    document = Json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    invalid(path + ": " + e.what());
  } catch (const Error& e) {
    invalid(e.what());
  }
  const auto base = fs::absolute(path).parent_path().string();
  return parse_config(document, base);
}

}  // namespace linkrec
