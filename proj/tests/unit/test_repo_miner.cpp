#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "linkrec/error.hpp"
#include "linkrec/process.hpp"
#include "linkrec/repo_miner.hpp"
#include "linkrec/synthetic.hpp"
#include "test_support.hpp"

using namespace linkrec;

namespace {

constexpr Timestamp kT0 = 1'577'836'800;

FixtureCommit fc(const std::string& key, Timestamp t, const std::string& msg, std::vector<std::string> parents = {}) {
  FixtureCommit c;
  c.key = key;
  c.time = t;
  c.message = msg;
  c.files = {{"file_" + key + ".txt", "content of " + key + "\n"}};
  c.parent_keys = std::move(parents);
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

TEST(Enumerate, EmptyRepository) {
  TempDir dir("empty");
  run_process({"git", "init", "-q", dir.str()});
  EXPECT_TRUE(enumerate_commits(dir.str()).empty());
  MinerOptions opts;
  opts.project_name = "empty";
  EXPECT_TRUE(build_commit_pool(dir.str(), opts).pool.commits.empty());
}

TEST(Enumerate, NotARepository) {
  TempDir dir("plain");
  try {
    GitRepository repo(dir.str());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotARepository);
  }
  EXPECT_THROW(GitRepository(dir.str("missing")), Error);
}

TEST(Enumerate, SingleRoot) {
  TempDir dir("root");
  const auto ids = materialize_repository(dir.str("repo"), {fc("c", kT0, "only")});
  EXPECT_EQ(enumerate_commits(dir.str("repo")), std::vector<std::string>{ids.at("c")});
}

TEST(Enumerate, LinearHistoryMatchesRevList) {
  TempDir dir("linear");
  std::vector<FixtureCommit> commits;
  for (int i = 0; i < 5; ++i) commits.push_back(fc("c" + std::to_string(i), kT0 + i * 100, "commit " + std::to_string(i)));
  materialize_repository(dir.str("repo"), commits);
  auto got = enumerate_commits(dir.str("repo"));
  ASSERT_EQ(got.size(), 5u);
  for (const auto& id : got) {
    EXPECT_EQ(id.size(), 40u);
    EXPECT_TRUE(std::all_of(id.begin(), id.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); }));
  }
  auto expected = lines(run_process({"git", "-C", dir.str("repo"), "rev-list", "--all"}).out);
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(got, expected);
}

TEST(Extract, RootMergeAndMessage) {
  TempDir dir("extract");
  const std::string paper_message = "Uptake nb-javac 11 jars for java tests runtime";
  const auto ids = materialize_repository(
      dir.str("repo"), {fc("a", kT0, "root commit"), fc("b", kT0 + 10, paper_message),
                        fc("c", kT0 + 20, "side branch", {"a"}), fc("m", kT0 + 30, "Merge side", {"b", "c"})});
  const GitRepository repo(dir.str("repo"));

  const auto root = repo.extract_commit(ids.at("a"), false);
  EXPECT_TRUE(root.parent_ids.empty());
  EXPECT_EQ(root.changed_files, std::vector<std::string>{"file_a.txt"});
  EXPECT_EQ(root.commit_time, kT0);

  const auto b = repo.extract_commit(ids.at("b"), true);
  EXPECT_EQ(b.message, paper_message);
  EXPECT_EQ(b.parent_ids, std::vector<std::string>{ids.at("a")});
  EXPECT_NE(b.code_diffs.find("+content of b"), std::string::npos);
  ASSERT_TRUE(b.committed_files.has_value());
  EXPECT_EQ(b.committed_files->at("file_b.txt"), "content of b\n");
  EXPECT_EQ(b.author, "Fixture Author <author@example.com>");
  EXPECT_EQ(b.committer, "Fixture Committer <committer@example.com>");

  const auto merge = repo.extract_commit(ids.at("m"), false);
  EXPECT_GE(merge.parent_ids.size(), 2u);
  EXPECT_FALSE(merge.committed_files.has_value());
}

TEST(Extract, UnknownCommit) {
  TempDir dir("unknown");
  materialize_repository(dir.str("repo"), {fc("a", kT0, "x")});
  try {
    extract_commit(dir.str("repo"), std::string(40, '0'), false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCommit);
  }
  EXPECT_THROW(extract_commit(dir.str("repo"), "not-a-hash", false), Error);
}

TEST(Pool, SortedScrubbedAndComplete) {
  TempDir dir("pool");
  // commit order differs from time order on purpose
  const auto ids = materialize_repository(
      dir.str("repo"), {fc("a", kT0 + 400, "first"), fc("b", kT0 + 100, "Closes #77"), fc("c", kT0 + 300, "third"),
                        fc("d", kT0 + 200, "Fix PROJ-9 bug"), fc("e", kT0 + 500, "fifth")});
  MinerOptions opts;
  opts.project_name = "demo";
  opts.jobs = 2;
  const auto mined = build_commit_pool(dir.str("repo"), opts);
  EXPECT_TRUE(mined.skipped.empty());
  ASSERT_EQ(mined.pool.commits.size(), 5u);
  EXPECT_TRUE(mined.pool.is_sorted());
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_LE(mined.pool.commits[i - 1].commit_time, mined.pool.commits[i].commit_time);
  }
  const auto* closes = mined.pool.find(ids.at("b"));
  ASSERT_NE(closes, nullptr);
  EXPECT_EQ(closes->message.find("#77"), std::string::npos);
  EXPECT_EQ(mined.pool.find(ids.at("d"))->message, "Fix bug");
  EXPECT_EQ(mined.pool.project_name, "demo");
}

TEST(Pool, DeterministicAcrossRebuilds) {
  TempDir a("det_a"), b("det_b");
  const std::vector<FixtureCommit> commits = {fc("x", kT0, "one"), fc("y", kT0 + 5, "two")};
  const auto ida = materialize_repository(a.str("repo"), commits);
  const auto idb = materialize_repository(b.str("repo"), commits);
  EXPECT_EQ(ida, idb);
  MinerOptions opts;
  EXPECT_EQ(build_commit_pool(a.str("repo"), opts).pool.commits, build_commit_pool(b.str("repo"), opts).pool.commits);
}
