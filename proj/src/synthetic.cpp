#include "linkrec/synthetic.hpp"

#include <filesystem>
#include <set>

#include "linkrec/error.hpp"
#include "linkrec/process.hpp"

namespace linkrec {

namespace fs = std::filesystem;

namespace {

void data_block(std::string& stream, const std::string& payload) {
  stream += "data " + std::to_string(payload.size()) + "\n" + payload + "\n";
}

std::string identity(const std::string& who, Timestamp t) {
  return who + " " + std::to_string(t) + " +0000";
}

ProcessResult git_in(const std::string& dir, const std::vector<std::string>& args,
                     const std::string& input = {}) {
  std::vector<std::string> argv = {"git", "-C", dir};
  argv.insert(argv.end(), args.begin(), args.end());
  auto r = run_process(argv, {}, {{"GIT_CONFIG_NOSYSTEM", "1"}}, input);
  if (r.exit_code != 0) {
    throw Error(ErrorCode::GitInvocationFailure, "git " + args.front() + ": " + r.err);
  }
  return r;
}

}  // namespace

std::map<std::string, std::string> materialize_repository(const std::string& repo_dir,
                                                          const std::vector<FixtureCommit>& commits) {
  fs::create_directories(repo_dir);
  if (fs::exists(fs::path(repo_dir) / ".git")) {
    throw Error(ErrorCode::InvalidArgument, repo_dir + " already contains a repository");
  }
  git_in(repo_dir, {"init", "-q"});
  git_in(repo_dir, {"symbolic-ref", "HEAD", "refs/heads/main"});

  std::map<std::string, std::size_t> mark_of;
  std::string stream;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    const auto& c = commits[i];
    if (!mark_of.emplace(c.key, i + 1).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate fixture commit key " + c.key);
    }
    std::vector<std::size_t> parents;
    for (const auto& key : c.parent_keys) {
      auto it = mark_of.find(key);
      if (it == mark_of.end()) throw Error(ErrorCode::InvalidArgument, "unknown parent key " + key);
      parents.push_back(it->second);
    }
    if (parents.empty() && !c.root && i > 0) parents.push_back(i);
    // Without a reset, fast-import would continue the branch from its tip.
    if (parents.empty()) stream += "reset refs/heads/main\n";
    stream += "commit refs/heads/main\n";
    stream += "mark :" + std::to_string(i + 1) + "\n";
    stream += "author " + identity(c.author, c.time) + "\n";
    stream += "committer " + identity(c.committer, c.time) + "\n";
    data_block(stream, c.message);
    if (!parents.empty()) {
      stream += "from :" + std::to_string(parents.front()) + "\n";
      for (std::size_t p = 1; p < parents.size(); ++p) stream += "merge :" + std::to_string(parents[p]) + "\n";
    }
    for (const auto& [path, content] : c.files) {
      stream += "M 100644 inline " + path + "\n";
      data_block(stream, content);
    }
    stream += "\n";
  }
  const auto marks_file = (fs::path(repo_dir) / ".git" / "fixture-marks").string();
  git_in(repo_dir, {"fast-import", "--quiet", "--export-marks=" + marks_file}, stream);
  if (!commits.empty()) git_in(repo_dir, {"checkout", "-q", "-f", "main"});

  std::map<std::size_t, std::string> id_of_mark;
  {
    const std::string text = read_file(marks_file);
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      const std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.size() < 3 || line[0] != ':') continue;
      const auto space = line.find(' ');
      id_of_mark[std::stoul(line.substr(1, space - 1))] = line.substr(space + 1);
    }
  }
  fs::remove(marks_file);
  std::map<std::string, std::string> ids;
  for (const auto& [key, mark] : mark_of) ids[key] = id_of_mark.at(mark);
  return ids;
}

FixtureCommit fixture_commit_from_json(const Json& j) {
  FixtureCommit c;
  try {
    c.key = j.at("key").get<std::string>();
    c.time = j.at("time").get<Timestamp>();
    c.message = j.at("message").get<std::string>();
    if (j.contains("files")) {
      for (const auto& [path, content] : j["files"].items()) c.files[path] = content.get<std::string>();
    }
    c.parent_keys = j.value("parents", std::vector<std::string>{});
    c.root = j.value("root", false);
    c.author = j.value("author", c.author);
    c.committer = j.value("committer", c.committer);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("fixture commit: ") + e.what());
  }
  return c;
}

MaterializedProject materialize_fixture_project(const std::string& fixture_dir, const std::string& out_dir) {
  const fs::path in(fixture_dir);
  const fs::path out(out_dir);
  fs::create_directories(out);

  std::vector<FixtureCommit> commits;
  for (const auto& row : read_jsonl((in / "commits.jsonl").string())) {
    commits.push_back(fixture_commit_from_json(row));
  }
  MaterializedProject project;
  project.repo_path = (out / "repo").string();
  const auto ids = materialize_repository(project.repo_path, commits);

  std::vector<Json> links;
  for (const auto& row : read_jsonl((in / "links.jsonl").string())) {
    const auto key = row.at("commit_key").get<std::string>();
    auto it = ids.find(key);
    if (it == ids.end()) throw Error(ErrorCode::ParseError, "link references unknown commit key " + key);
    Json link;
    link["issue_id"] = row.at("issue_id");
    link["commit_id"] = it->second;
    links.push_back(std::move(link));
  }
  project.links_file = (out / "links.jsonl").string();
  write_jsonl(project.links_file, links);

  project.issues_file = (out / "issues.jsonl").string();
  fs::copy_file(in / "issues.jsonl", project.issues_file, fs::copy_options::overwrite_existing);

  Json config = read_json_file((in / "config.json").string());
  config["repo_path"] = "repo";
  config["issues_file"] = "issues.jsonl";
  config["links_file"] = "links.jsonl";
  if (!config.contains("output_dir")) config["output_dir"] = "run";
  project.config_file = (out / "config.json").string();
  write_json_file(project.config_file, config);
  return project;
}

}  // namespace linkrec
