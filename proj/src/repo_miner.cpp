#include "linkrec/repo_miner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "linkrec/error.hpp"
#include "linkrec/process.hpp"

namespace linkrec {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(std::move(current));
  return parts;
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  for (auto& line : split(text, '\n')) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

bool is_hex_id(const std::string& id) {
  return id.size() >= 4 && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

GitRepository::GitRepository(std::string path, std::string git_binary)
    : path_(std::move(path)), git_binary_(std::move(git_binary)) {
  std::error_code ec;
  if (!std::filesystem::is_directory(path_, ec)) {
    throw Error(ErrorCode::NotARepository, path_ + " is not a directory");
  }
  const auto result = run_process({git_binary_, "-C", path_, "rev-parse", "--git-dir"});
  if (result.exit_code != 0) {
    throw Error(ErrorCode::NotARepository, path_ + ": " + result.err);
  }
}

std::string GitRepository::git(const std::vector<std::string>& args) const {
  std::vector<std::string> argv = {git_binary_, "-C", path_, "-c", "core.quotepath=false",
                                   "--no-pager"};
  argv.insert(argv.end(), args.begin(), args.end());
  auto result = run_process(argv);
  if (result.exit_code != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += " " + a;
    throw Error(ErrorCode::GitInvocationFailure, "git" + cmd + ": " + result.err);
  }
  return std::move(result.out);
}

std::vector<std::string> GitRepository::enumerate_commits() const {
  // An empty repository has no refs; `git log --all` then prints nothing.
  const auto refs = git({"for-each-ref", "--format=%(objectname)"});
  if (nonempty_lines(refs).empty()) return {};
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (auto& id : nonempty_lines(git({"log", "--all", "--format=%H"}))) {
    if (seen.insert(id).second) ids.push_back(std::move(id));
  }
  return ids;
}

CommitRecord GitRepository::extract_commit(const std::string& commit_id,
                                           bool include_file_contents) const {
  if (!is_hex_id(commit_id)) {
    throw Error(ErrorCode::UnknownCommit, "'" + commit_id + "' is not a commit id");
  }
  const auto probe = run_process(
      {git_binary_, "-C", path_, "cat-file", "-e", commit_id + "^{commit}"});
  if (probe.exit_code != 0) {
    throw Error(ErrorCode::UnknownCommit, commit_id + " not found in " + path_);
  }

  // NUL-separated header fields; the raw message comes last so it may contain
  // anything except NUL (which git forbids in messages anyway).
  const auto header = git({"show", "-s", "--no-show-signature",
                           "--format=%H%x00%P%x00%an <%ae>%x00%cn <%ce>%x00%ct%x00%B",
                           commit_id});
  auto fields = split(header, '\0');
  if (fields.size() < 6) {
    throw Error(ErrorCode::GitInvocationFailure, "unexpected show output for " + commit_id);
  }
  CommitRecord record;
  record.commit_id = fields[0];
  for (auto& p : split(fields[1], ' ')) {
    if (!p.empty()) record.parent_ids.push_back(std::move(p));
  }
  record.author = fields[2];
  record.committer = fields[3];
  try {
    record.commit_time = std::stoll(fields[4]);
  } catch (const std::exception&) {
    throw Error(ErrorCode::GitInvocationFailure, "bad commit time for " + commit_id);
  }
  std::string message = fields[5];
  for (std::size_t i = 6; i < fields.size(); ++i) message += '\0' + fields[i];
  while (!message.empty() && message.back() == '\n') message.pop_back();
  record.message = std::move(message);

  // Merges are diffed against their first parent; roots against the empty tree.
  std::vector<std::string> range;
  if (record.parent_ids.empty()) {
    range = {"--root", commit_id};
  } else {
    range = {record.parent_ids.front(), commit_id};
  }
  std::vector<std::string> names_cmd = {"diff-tree", "-r", "--no-commit-id", "--name-only",
                                        "--no-renames"};
  names_cmd.insert(names_cmd.end(), range.begin(), range.end());
  record.changed_files = nonempty_lines(git(names_cmd));

  std::vector<std::string> diff_cmd = {"diff-tree", "-r", "-p", "--no-commit-id", "--no-color",
                                       "--no-ext-diff", "--no-renames", "--full-index"};
  diff_cmd.insert(diff_cmd.end(), range.begin(), range.end());
  record.code_diffs = git(diff_cmd);

  if (include_file_contents) {
    std::map<std::string, std::string> files;
    const auto present = nonempty_lines(git({"ls-tree", "-r", "--name-only", commit_id}));
    const std::set<std::string> in_tree(present.begin(), present.end());
    for (const auto& path : record.changed_files) {
      if (in_tree.count(path) == 0) continue;  // deleted by this commit
      files[path] = git({"cat-file", "blob", commit_id + ":" + path});
    }
    record.committed_files = std::move(files);
  }
  return record;
}

std::vector<std::string> enumerate_commits(const std::string& repo_path) {
  return GitRepository(repo_path).enumerate_commits();
}

CommitRecord extract_commit(const std::string& repo_path, const std::string& commit_id,
                            bool include_file_contents) {
  return GitRepository(repo_path).extract_commit(commit_id, include_file_contents);
}

MinedPool build_commit_pool(const std::string& repo_path, const MinerOptions& options) {
  const GitRepository repo(repo_path, options.git_binary);
  const TagScrubber scrub(options.tag_patterns);
  const auto ids = repo.enumerate_commits();

  std::vector<std::optional<CommitRecord>> slots(ids.size());
  std::vector<std::string> failures(ids.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < ids.size(); i = next++) {
      try {
        auto record = repo.extract_commit(ids[i], options.include_file_contents);
        record.message = scrub(record.message);
        slots[i] = std::move(record);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  unsigned jobs = options.jobs != 0 ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(ids.size(), 1)));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  MinedPool mined;
  mined.pool.project_name = options.project_name;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slots[i]) {
      mined.pool.commits.push_back(std::move(*slots[i]));
    } else {
      mined.skipped.push_back({ids[i], failures[i]});
    }
  }
  mined.pool.normalize();
  std::sort(mined.skipped.begin(), mined.skipped.end(),
            [](const SkippedCommit& a, const SkippedCommit& b) { return a.commit_id < b.commit_id; });
  return mined;
}

}  // namespace linkrec
