#include "linkrec/records.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "linkrec/error.hpp"

namespace linkrec {

namespace fs = std::filesystem;

namespace {

template <typename T>
T required(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T optional_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad value for '") + key + "': " + e.what());
  }
}

// Link and issue files from external trackers often carry ids as numbers.
std::string id_field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::ParseError, std::string("missing key '") + key + "'");
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw Error(ErrorCode::ParseError, std::string("key '") + key + "' must be a string");
}

}  // namespace

void CommitPool::normalize() {
  std::sort(commits.begin(), commits.end(), [](const CommitRecord& a, const CommitRecord& b) {
    if (a.commit_time != b.commit_time) return a.commit_time < b.commit_time;
    return a.commit_id < b.commit_id;
  });
  std::set<std::string> ids;
  for (const auto& c : commits) {
    if (!ids.insert(c.commit_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate commit id " + c.commit_id);
    }
  }
}

bool CommitPool::is_sorted() const {
  for (std::size_t i = 1; i < commits.size(); ++i) {
    const auto& a = commits[i - 1];
    const auto& b = commits[i];
    if (a.commit_time > b.commit_time) return false;
    if (a.commit_time == b.commit_time && !(a.commit_id < b.commit_id)) return false;
  }
  return true;
}

const CommitRecord* CommitPool::find(const std::string& commit_id) const {
  for (const auto& c : commits) {
    if (c.commit_id == commit_id) return &c;
  }
  return nullptr;
}

Json to_json(const CommitRecord& c) {
  Json j;
  j["commit_id"] = c.commit_id;
  j["parent_ids"] = c.parent_ids;
  j["author"] = c.author;
  j["committer"] = c.committer;
  j["commit_time"] = c.commit_time;
  j["message"] = c.message;
  j["changed_files"] = c.changed_files;
  j["code_diffs"] = c.code_diffs;
  if (c.committed_files) {
    Json files = Json::object();
    for (const auto& [path, content] : *c.committed_files) files[path] = content;
    j["committed_files"] = std::move(files);
  }
  return j;
}

CommitRecord commit_from_json(const Json& j) {
  CommitRecord c;
  c.commit_id = required<std::string>(j, "commit_id");
  c.parent_ids = optional_or<std::vector<std::string>>(j, "parent_ids", {});
  c.author = optional_or<std::string>(j, "author", "");
  c.committer = optional_or<std::string>(j, "committer", "");
  c.commit_time = required<Timestamp>(j, "commit_time");
  if (c.commit_time < 0) {
    throw Error(ErrorCode::ParseError, "negative commit_time for " + c.commit_id);
  }
  c.message = optional_or<std::string>(j, "message", "");
  c.changed_files = optional_or<std::vector<std::string>>(j, "changed_files", {});
  c.code_diffs = optional_or<std::string>(j, "code_diffs", "");
  if (auto it = j.find("committed_files"); it != j.end() && it->is_object()) {
    std::map<std::string, std::string> files;
    for (const auto& [path, content] : it->items()) files[path] = content.get<std::string>();
    c.committed_files = std::move(files);
  }
  return c;
}

Json to_json(const IssueRecord& issue) {
  Json j;
  j["issue_id"] = issue.issue_id;
  j["summary"] = issue.summary;
  j["description"] = issue.description;
  j["create_time"] = issue.create_time;
  j["comments"] = issue.comments;
  return j;
}

IssueRecord issue_from_json(const Json& j) {
  IssueRecord issue;
  issue.issue_id = id_field(j, "issue_id");
  issue.summary = optional_or<std::string>(j, "summary", "");
  issue.description = optional_or<std::string>(j, "description", "");
  issue.create_time = required<Timestamp>(j, "create_time");
  issue.comments = optional_or<std::vector<std::string>>(j, "comments", {});
  return issue;
}

Json to_json(const LinkRecord& link) {
  Json j;
  j["issue_id"] = link.issue_id;
  j["commit_id"] = link.commit_id;
  j["label"] = static_cast<int>(link.label);
  return j;
}

LinkRecord link_from_json(const Json& j) {
  LinkRecord link;
  link.issue_id = id_field(j, "issue_id");
  link.commit_id = required<std::string>(j, "commit_id");
  const int label = optional_or<int>(j, "label", 1);
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::ParseError, "label must be 0 or 1");
  }
  link.label = label == 1 ? LinkLabel::True : LinkLabel::False;
  return link;
}

std::string dump_json(const Json& j, int indent) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::IoError, "rename to " + path + " failed: " + ec.message());
  }
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<Json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::string& path, const std::vector<Json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += dump_json(row);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Json read_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  write_file_atomic(path, dump_json(j, 2) + "\n");
}

std::vector<CommitRecord> read_commits(const std::string& path) {
  std::vector<CommitRecord> commits;
  for (const auto& row : read_jsonl(path)) commits.push_back(commit_from_json(row));
  return commits;
}

CommitPool read_commit_pool(const std::string& path, const std::string& project_name) {
  CommitPool pool{project_name, read_commits(path)};
  pool.normalize();
  return pool;
}

void write_commit_pool(const std::string& path, const CommitPool& pool) {
  std::vector<Json> rows;
  rows.reserve(pool.commits.size());
  for (const auto& c : pool.commits) rows.push_back(to_json(c));
  write_jsonl(path, rows);
}

std::vector<IssueRecord> read_issues(const std::string& path) {
  std::vector<IssueRecord> issues;
  for (const auto& row : read_jsonl(path)) issues.push_back(issue_from_json(row));
  return issues;
}

void write_issues(const std::string& path, const std::vector<IssueRecord>& issues) {
  std::vector<Json> rows;
  for (const auto& issue : issues) rows.push_back(to_json(issue));
  write_jsonl(path, rows);
}

std::vector<LinkRecord> read_links(const std::string& path) {
  std::vector<LinkRecord> links;
  for (const auto& row : read_jsonl(path)) links.push_back(link_from_json(row));
  return links;
}

void write_links(const std::string& path, const std::vector<LinkRecord>& links) {
  std::vector<Json> rows;
  for (const auto& link : links) rows.push_back(to_json(link));
  write_jsonl(path, rows);
}

}  // namespace linkrec
