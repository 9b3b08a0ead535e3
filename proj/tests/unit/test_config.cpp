#include <gtest/gtest.h>

#include <cstdlib>
#include <optional>

#include "linkrec/config.hpp"
#include "linkrec/error.hpp"

using namespace linkrec;

namespace {

Json minimal() {
  return Json::parse(R"({"project_name": "p", "repo_path": "repo", "issues_file": "i.jsonl",
                         "links_file": "l.jsonl", "output_dir": "out", "seed": 7})");
}

std::optional<ErrorCode> code_of(const Json& doc) {
  try {
    parse_config(doc, "/base");
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST(Config, DefaultsAndPaths) {
  const auto c = parse_config(minimal(), "/base");
  EXPECT_EQ(c.repo_path, "/base/repo");
  EXPECT_EQ(c.output_dir, "/base/out");
  EXPECT_EQ(c.epsilon_days, 365);
  EXPECT_EQ(c.n_false, 99u);
  EXPECT_EQ(c.sample_cap, 1000u);
  EXPECT_EQ(c.split_ratio.train, 4u);
  EXPECT_EQ(c.split_ratio.test, 1u);
  EXPECT_EQ(c.rerank.k, 10u);
  EXPECT_TRUE(c.rerank.enabled);
  EXPECT_EQ(c.embedding.type, "stub");
  EXPECT_EQ(c.embedding.dimension, 384u);
  EXPECT_EQ(*c.seed, 7u);
  EXPECT_EQ(c.mode, ConstructionMode::RDS);
}

TEST(Config, Validation) {
  auto doc = minimal();
  doc["epsilon_days"] = 0;
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
  doc = minimal();
  doc["rerank"] = {{"k", 21}};
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
  doc["rerank"] = {{"k", 0}};
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
  doc["rerank"] = {{"k", 20}};
  EXPECT_FALSE(code_of(doc));
  doc = minimal();
  doc["unknown_key"] = 1;
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
  doc = minimal();
  doc["mode"] = "SOMETHING";
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
  doc = minimal();
  doc.erase("project_name");
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
}

TEST(Config, SecretsOnlyFromEnvironment) {
  auto doc = minimal();
  doc["embedding_provider"] = {{"type", "remote"}, {"endpoint", "http://x"}, {"api_key", "oops"}};
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
}

TEST(Config, EnvironmentInterpolation) {
  ::setenv("LINKREC_TEST_HOST", "example.org", 1);
  auto doc = minimal();
  doc["embedding_provider"] = {{"type", "remote"}, {"endpoint", "https://${LINKREC_TEST_HOST}/embed"}};
  const auto c = parse_config(doc, "/base");
  EXPECT_EQ(c.embedding.remote.endpoint, "https://example.org/embed");
  ::unsetenv("LINKREC_TEST_HOST");
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
}

TEST(Config, RerankClients) {
  auto doc = minimal();
  doc["rerank"] = {{"enabled", false}, {"client", "reverse"}};
  auto c = parse_config(doc, "/base");
  EXPECT_FALSE(c.rerank.enabled);
  EXPECT_EQ(c.rerank.client.spec, "reverse");
  doc["rerank"] = {{"client", "scripted:answers.json"}};
  EXPECT_EQ(parse_config(doc, "/base").rerank.client.spec, "scripted:/base/answers.json");
  doc["rerank"] = {{"client", {{"type", "remote"}, {"endpoint", "http://llm"}, {"model", "m"}}},
                   {"rate_limit", {{"requests_per_minute", 30}, {"max_in_flight", 2}}}};
  c = parse_config(doc, "/base");
  EXPECT_EQ(c.rerank.client.spec, "remote");
  EXPECT_EQ(c.rerank.client.remote.model, "m");
  EXPECT_EQ(c.rerank.rate_limit.max_in_flight, 2u);
  doc["rerank"] = {{"client", "gpt"}};
  EXPECT_EQ(code_of(doc), ErrorCode::ConfigInvalid);
}

TEST(Config, SeedOptionalAtParseTime) {
  auto doc = minimal();
  doc.erase("seed");
  EXPECT_FALSE(parse_config(doc, "/base").seed);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigInvalid), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::MissingUpstream), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::ProviderFailure), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::ClientFailure), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::IoError), 5);
}
