#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "linkrec/error.hpp"
#include "linkrec/hashing.hpp"
#include "linkrec/llm_client.hpp"
#include "linkrec/reranker.hpp"
#include "test_support.hpp"

using namespace linkrec;

namespace {

IssueRecord sample_issue() {
  IssueRecord i;
  i.issue_id = "NB-1";
  i.summary = "nb-javac 11 upgrade";
  i.description = "Tests should run on the new compiler jars.";
  i.create_time = 1;
  return i;
}

RankedList retrieval_list(std::size_t n) {
  RankedList l;
  l.issue_id = "NB-1";
  for (std::size_t i = 0; i < n; ++i) {
    l.ranking.push_back({"c" + std::to_string(i), 1.0 - 0.01 * static_cast<double>(i)});
  }
  return l;
}

std::map<std::string, std::string> messages(std::size_t n) {
  std::map<std::string, std::string> m;
  for (std::size_t i = 0; i < n; ++i) m["c" + std::to_string(i)] = "Short message number " + std::to_string(i);
  return m;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

bool is_permutation_of(const RankedList& a, const RankedList& b) {
  auto x = a.commit_ids(), y = b.commit_ids();
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

class FlakyClient final : public LlmClient {
 public:
  explicit FlakyClient(int failures) : failures_(failures) {}
  std::string name() const override { return "flaky"; }
  LlmResponse complete(const std::string& prompt) const override {
    ++calls;
    if (failures_-- > 0) throw TransportError("connection reset");
    return EchoClient().complete(prompt);
  }
  mutable std::atomic<int> calls{0};

 private:
  mutable std::atomic<int> failures_;
};

class RejectingClient final : public LlmClient {
 public:
  std::string name() const override { return "rejecting"; }
  LlmResponse complete(const std::string&) const override {
    ++calls;
    throw Error(ErrorCode::ClientFailure, "401");
  }
  mutable std::atomic<int> calls{0};
};

RerankOptions fast_options() {
  RerankOptions o;
  o.retry.initial_delay = std::chrono::milliseconds(1);
  o.retry.max_delay = std::chrono::milliseconds(1);
  return o;
}

}  // namespace

TEST(Prompt, SingleCandidate) {
  const auto req = build_prompt(sample_issue(), {{"deadbeef", "msg"}});
  const auto& p = req.prompt_text;
  const auto list = p.substr(p.find("Candidate commits:"));
  EXPECT_EQ(list.find("deadbeef"), list.rfind("deadbeef"));
  EXPECT_NE(list.find("deadbeef"), std::string::npos);
  EXPECT_NE(p.find("nb-javac 11 upgrade"), std::string::npos);
  EXPECT_NE(p.find("Tests should run"), std::string::npos);
}

TEST(Prompt, TenCandidatesInOrderWithinBudget) {
  std::vector<RerankCandidate> cands;
  for (const auto& [id, msg] : messages(10)) cands.push_back({id, msg});
  std::reverse(cands.begin(), cands.end());
  const auto req = build_prompt(sample_issue(), cands);
  std::vector<std::string> expected;
  for (const auto& c : cands) expected.push_back(c.commit_id);
  EXPECT_EQ(candidate_ids_in_prompt(req.prompt_text), expected);
  EXPECT_LE(whitespace_token_count(req.prompt_text), kPromptTokenBudget);
}

TEST(Prompt, LongMessagesShrinkToBudget) {
  std::vector<RerankCandidate> cands;
  std::string long_msg;
  for (int i = 0; i < 600; ++i) long_msg += "word ";
  for (int i = 0; i < 20; ++i) cands.push_back({"c" + std::to_string(i), long_msg});
  PromptOptions opts;
  const auto req = build_prompt(sample_issue(), cands, opts);
  EXPECT_LE(whitespace_token_count(req.prompt_text), opts.token_budget);
  EXPECT_EQ(candidate_ids_in_prompt(req.prompt_text).size(), 20u);
}

TEST(Prompt, Limits) {
  EXPECT_THROW(build_prompt(sample_issue(), {}), Error);
  std::vector<RerankCandidate> many;
  for (int i = 0; i < 21; ++i) many.push_back({"c" + std::to_string(i), "m"});
  try {
    build_prompt(sample_issue(), many);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyCandidates);
  }
}

TEST(Parse, Examples) {
  const auto orig = ids(10);
  auto perm = orig;
  std::reverse(perm.begin(), perm.end());
  EXPECT_EQ(parse_rerank_response(Json(perm).dump(), orig), perm);
  EXPECT_FALSE(parse_rerank_response("I think commit abc is best", orig));

  const auto repaired = parse_rerank_response(R"(["c5","c2","c9","alien","c0","c7","c1","c3"])", orig);
  ASSERT_TRUE(repaired);
  EXPECT_EQ(*repaired, (std::vector<std::string>{"c5", "c2", "c9", "c0", "c7", "c1", "c3", "c4", "c6", "c8"}));
}

TEST(Parse, RepairRules) {
  const std::vector<std::string> orig = {"a", "b", "c"};
  EXPECT_EQ(*parse_rerank_response(R"(["b","b","a"])", orig), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(*parse_rerank_response("Sure! Here it is: [\"c\", \"a\", \"b\"] done", orig),
            (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_FALSE(parse_rerank_response("[1, 2, 3]", orig));
  EXPECT_FALSE(parse_rerank_response("", orig));
}

TEST(Parse, StrictMode) {
  const std::vector<std::string> orig = {"a", "b", "c"};
  EXPECT_TRUE(parse_rerank_response(R"(["c","b","a"])", orig, true));
  EXPECT_FALSE(parse_rerank_response(R"(["c","b"])", orig, true));
  EXPECT_FALSE(parse_rerank_response(R"(["c","b","a","a"])", orig, true));
  EXPECT_FALSE(parse_rerank_response(R"(["c","b","x"])", orig, true));
}

TEST(Rerank, EchoIsIdentity) {
  const auto base = retrieval_list(25);
  const auto out = rerank(EchoClient(), sample_issue(), base, messages(25));
  EXPECT_FALSE(out.fallback);
  EXPECT_EQ(out.list.commit_ids(), base.commit_ids());
  EXPECT_EQ(out.list.stage, RankingStage::RERANKED);
  EXPECT_TRUE(out.usage.estimated);
  EXPECT_GT(out.usage.input_tokens, 0u);
}

TEST(Rerank, ReverseFlipsTopBlockOnly) {
  const auto base = retrieval_list(25);
  const auto out = rerank(ReverseClient(), sample_issue(), base, messages(25));
  const auto got = out.list.commit_ids();
  auto expected = base.commit_ids();
  std::reverse(expected.begin(), expected.begin() + 10);
  EXPECT_EQ(got, expected);
  for (const auto& e : out.list.ranking) {
    const auto idx = std::stoul(e.commit_id.substr(1));
    EXPECT_EQ(e.score, base.ranking[idx].score);
  }
  EXPECT_TRUE(is_permutation_of(out.list, base));
}

TEST(Rerank, ShortListSendsEverything) {
  const auto base = retrieval_list(4);
  const auto out = rerank(ReverseClient(), sample_issue(), base, messages(4));
  EXPECT_EQ(out.list.commit_ids(), (std::vector<std::string>{"c3", "c2", "c1", "c0"}));
}

TEST(Rerank, MalformedFallsBack) {
  const auto base = retrieval_list(15);
  const auto out = rerank(MalformedClient(), sample_issue(), base, messages(15));
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.fallback_reason, "format");
  EXPECT_EQ(out.list.commit_ids(), base.commit_ids());
}

TEST(Rerank, TransportErrorsRetriedThenFallback) {
  FlakyClient two_failures(2);
  const auto ok = rerank(two_failures, sample_issue(), retrieval_list(5), messages(5), fast_options());
  EXPECT_FALSE(ok.fallback);
  EXPECT_EQ(ok.attempts, 3u);

  FlakyClient always(100);
  const auto failed = rerank(always, sample_issue(), retrieval_list(5), messages(5), fast_options());
  EXPECT_TRUE(failed.fallback);
  EXPECT_EQ(failed.fallback_reason, "client");
  EXPECT_EQ(always.calls, 3);
  EXPECT_EQ(failed.list.commit_ids(), retrieval_list(5).commit_ids());

  RejectingClient reject;
  const auto rejected = rerank(reject, sample_issue(), retrieval_list(5), messages(5), fast_options());
  EXPECT_TRUE(rejected.fallback);
  EXPECT_EQ(reject.calls, 1);
}

TEST(Rerank, ScriptedClientByPromptHash) {
  TempDir dir("scripted");
  const auto base = retrieval_list(3);
  std::vector<RerankCandidate> cands;
  const auto msgs = messages(3);
  for (const auto& e : base.ranking) cands.push_back({e.commit_id, msgs.at(e.commit_id)});
  const auto prompt = build_prompt(sample_issue(), cands).prompt_text;
  write_json_file(dir.str("s.json"), Json{{sha256_hex(prompt), R"(["c2","c0","c1"])"}});
  const auto client = make_stub_client("scripted:" + dir.str("s.json"));
  const auto out = rerank(*client, sample_issue(), base, msgs);
  EXPECT_EQ(out.list.commit_ids(), (std::vector<std::string>{"c2", "c0", "c1"}));
  EXPECT_EQ(client->complete("other prompt").text, "");
  EXPECT_THROW(make_stub_client("nonsense"), Error);
}

TEST(Rerank, RerankAllKeepsInputOrder) {
  std::map<std::string, IssueRecord> issues;
  std::vector<RankedList> lists;
  for (int i = 0; i < 6; ++i) {
    auto issue = sample_issue();
    issue.issue_id = "I" + std::to_string(i);
    issues[issue.issue_id] = issue;
    auto l = retrieval_list(12);
    l.issue_id = issue.issue_id;
    lists.push_back(l);
  }
  RateLimit limit;
  limit.max_in_flight = 3;
  const auto outs = rerank_all(ReverseClient(), issues, lists, messages(12), {}, limit);
  ASSERT_EQ(outs.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(outs[i].list.issue_id, "I" + std::to_string(i));
    EXPECT_EQ(outs[i].list.ranking[0].commit_id, "c9");
  }
}

TEST(Cost, Examples) {
  EXPECT_EQ(estimate_cost({0, 0, false}, kReferencePricing).total, 0.0);
  const auto c = estimate_cost({758, 266, false}, kReferencePricing);
  EXPECT_NEAR(c.total, 0.009, 0.0009);
  const auto p = Pricing::per_million(3.0, 7.0);
  const auto one = estimate_cost({100, 10, false}, p);
  const auto total = aggregate_cost({one, one});
  EXPECT_NEAR(total.total, 2 * (100 * p.input_per_token + 10 * p.output_per_token), 1e-15);
  EXPECT_EQ(total.input_tokens, 200u);
  EXPECT_THROW(estimate_cost({1, 1, false}, Pricing{-1, 0}), Error);
}

TEST(Tokens, WhitespaceProxy) {
  EXPECT_EQ(whitespace_token_count(""), 0u);
  EXPECT_EQ(whitespace_token_count("  a b\n\tc  "), 3u);
}

namespace {

class FakeChatServer {
 public:
  FakeChatServer(int status, std::string body) : status_(status), body_(std::move(body)) {
    server_.Post("/v1/chat", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      last_request = req.body;
      auth = req.get_header_value("Authorization");
      res.status = status_;
      res.set_content(body_, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeChatServer() {
    server_.stop();
    thread_.join();
  }
  RemoteLlmConfig config() const {
    RemoteLlmConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat";
    c.model = "test-model";
    c.timeout = std::chrono::seconds(5);
    return c;
  }
  std::atomic<int> calls{0};
  std::string last_request;
  std::string auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int status_;
  std::string body_;
};

}  // namespace

TEST(RemoteLlm, ReadsContentAndUsage) {
  FakeChatServer server(200, R"({"choices":[{"message":{"role":"assistant","content":"[\"b\",\"a\"]"}}],
                                 "usage":{"prompt_tokens":758,"completion_tokens":266}})");
  ::setenv("LINKREC_LLM_API_KEY", "k-123", 1);
  const RemoteLlmClient client(server.config());
  ::unsetenv("LINKREC_LLM_API_KEY");
  const auto r = client.complete("hello there");
  EXPECT_EQ(r.text, R"(["b","a"])");
  EXPECT_EQ(r.usage.input_tokens, 758u);
  EXPECT_EQ(r.usage.output_tokens, 266u);
  EXPECT_FALSE(r.usage.estimated);
  EXPECT_EQ(server.auth, "Bearer k-123");
  const auto req = Json::parse(server.last_request);
  EXPECT_EQ(req["model"], "test-model");
  EXPECT_EQ(req["messages"][0]["role"], "user");
  EXPECT_EQ(req["messages"][0]["content"], "hello there");
  EXPECT_FALSE(req.contains("temperature"));
}

TEST(RemoteLlm, EstimatesUsageWhenAbsent) {
  FakeChatServer server(200, R"({"choices":[{"message":{"content":"one two"}}]})");
  const RemoteLlmClient client(server.config());
  const auto r = client.complete("a b c");
  EXPECT_TRUE(r.usage.estimated);
  EXPECT_EQ(r.usage.input_tokens, 3u);
  EXPECT_EQ(r.usage.output_tokens, 2u);
}

TEST(RemoteLlm, ServerErrorsAreTransient) {
  FakeChatServer server(503, "{}");
  const RemoteLlmClient client(server.config());
  EXPECT_THROW(client.complete("x"), TransportError);
  const auto out = rerank(client, sample_issue(), retrieval_list(3), messages(3), fast_options());
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.fallback_reason, "client");
  EXPECT_EQ(server.calls, 4);
}

TEST(RemoteLlm, MalformedBodyFallsBackOnFormat) {
  FakeChatServer server(200, "not json");
  const RemoteLlmClient client(server.config());
  const auto out = rerank(client, sample_issue(), retrieval_list(3), messages(3), fast_options());
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.fallback_reason, "format");
}
