#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace linkrec {

using Json = nlohmann::ordered_json;

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct CommitRecord {
  std::string commit_id;
  std::vector<std::string> parent_ids;
  std::string author;
  std::string committer;
  Timestamp commit_time = 0;
  std::string message;
  std::vector<std::string> changed_files;
  std::string code_diffs;
  std::optional<std::map<std::string, std::string>> committed_files;

  bool operator==(const CommitRecord&) const = default;
};

// Commits of one project, sorted by (commit_time, commit_id).
struct CommitPool {
  std::string project_name;
  std::vector<CommitRecord> commits;

  // Sorts into canonical order. Throws InvalidArgument on duplicate ids.
  void normalize();
  bool is_sorted() const;
  const CommitRecord* find(const std::string& commit_id) const;
};

struct IssueRecord {
  std::string issue_id;
  std::string summary;
  std::string description;
  Timestamp create_time = 0;
  std::vector<std::string> comments;

  bool operator==(const IssueRecord&) const = default;
};

enum class LinkLabel : int { False = 0, True = 1 };

struct LinkRecord {
  std::string issue_id;
  std::string commit_id;
  LinkLabel label = LinkLabel::True;

  bool operator==(const LinkRecord&) const = default;
};

Json to_json(const CommitRecord& commit);
CommitRecord commit_from_json(const Json& j);
Json to_json(const IssueRecord& issue);
IssueRecord issue_from_json(const Json& j);
Json to_json(const LinkRecord& link);
// Ground-truth link files carry no label; a missing label means a true link.
LinkRecord link_from_json(const Json& j);

// JSON Lines helpers. Output is UTF-8 with invalid sequences replaced.
std::string dump_json(const Json& j, int indent = -1);
std::vector<Json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Json>& rows);
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// Writes via a temporary sibling file and rename, so readers never observe a
// partially written artifact.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

std::vector<CommitRecord> read_commits(const std::string& path);
CommitPool read_commit_pool(const std::string& path, const std::string& project_name);
void write_commit_pool(const std::string& path, const CommitPool& pool);
std::vector<IssueRecord> read_issues(const std::string& path);
void write_issues(const std::string& path, const std::vector<IssueRecord>& issues);
std::vector<LinkRecord> read_links(const std::string& path);
void write_links(const std::string& path, const std::vector<LinkRecord>& links);

}  // namespace linkrec
