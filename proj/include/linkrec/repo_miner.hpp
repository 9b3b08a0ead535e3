#pragma once

#include <string>
#include <vector>

#include "linkrec/records.hpp"
#include "linkrec/scrub.hpp"

namespace linkrec {

struct MinerOptions {
  std::string project_name;
  bool include_file_contents = false;
  // Worker threads for per-commit extraction; 0 picks hardware concurrency.
  unsigned jobs = 0;
  std::vector<std::string> tag_patterns = TagScrubber::default_patterns();
  std::string git_binary = "git";
};

struct SkippedCommit {
  std::string commit_id;
  std::string reason;
};

struct MinedPool {
  CommitPool pool;
  std::vector<SkippedCommit> skipped;
};

// Thin wrapper over the system git binary for one local clone.
class GitRepository {
 public:
  // Throws NotARepository when `path` has no git metadata.
  explicit GitRepository(std::string path, std::string git_binary = "git");

  const std::string& path() const { return path_; }

  // Every commit reachable from any ref, deduplicated, in `git log --all` order.
  std::vector<std::string> enumerate_commits() const;

  // Throws UnknownCommit or GitInvocationFailure.
  CommitRecord extract_commit(const std::string& commit_id, bool include_file_contents) const;

 private:
  std::string git(const std::vector<std::string>& args) const;

  std::string path_;
  std::string git_binary_;
};

std::vector<std::string> enumerate_commits(const std::string& repo_path);
CommitRecord extract_commit(const std::string& repo_path, const std::string& commit_id,
                            bool include_file_contents);

// Mines every commit, scrubs issue tags from messages and sorts the pool.
// Commits that fail to extract are reported in `skipped` rather than thrown.
MinedPool build_commit_pool(const std::string& repo_path, const MinerOptions& options);

}  // namespace linkrec
