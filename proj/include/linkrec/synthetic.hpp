#pragma once

#include <map>
#include <string>
#include <vector>

#include "linkrec/records.hpp"

namespace linkrec {

// A commit to be written into a generated repository. Parents are given by
// key; an empty list continues from the previous commit (or starts a root
// when it is the first one).
struct FixtureCommit {
  std::string key;
  Timestamp time = 0;
  std::string message;
  std::map<std::string, std::string> files;  // path -> new content
  std::vector<std::string> parent_keys;
  bool root = false;  // force a parentless commit
  std::string author = "Fixture Author <author@example.com>";
  std::string committer = "Fixture Committer <committer@example.com>";
};

// Builds a git repository at `repo_dir` (created, must not already hold a
// repository) with exactly these commits on branch `main`, using
// `git fast-import`. Commit ids depend only on the inputs. Returns key ->
// commit id.
std::map<std::string, std::string> materialize_repository(const std::string& repo_dir,
                                                          const std::vector<FixtureCommit>& commits);

FixtureCommit fixture_commit_from_json(const Json& j);

struct MaterializedProject {
  std::string repo_path;
  std::string issues_file;
  std::string links_file;
  std::string config_file;
};

// Turns a fixture directory (commits.jsonl, issues.jsonl, links.jsonl with
// `commit_key` references, config.json template) into a runnable project
// under `out_dir`: a git repository, links rewritten to real commit ids and
// a config whose paths point at them.
MaterializedProject materialize_fixture_project(const std::string& fixture_dir, const std::string& out_dir);

}  // namespace linkrec
