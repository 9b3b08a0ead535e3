#include "linkrec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "linkrec/error.hpp"
#include "linkrec/rng.hpp"

namespace linkrec {

namespace {

std::vector<std::string> unique_issue_ids(const std::vector<LinkRecord>& links) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& link : links) {
    if (seen.insert(link.issue_id).second) ids.push_back(link.issue_id);
  }
  return ids;
}

// True links grouped per issue, (issue, commit) deduplicated, input order kept.
std::map<std::string, std::vector<std::string>> fixes_by_issue(
    const std::vector<LinkRecord>& links) {
  std::map<std::string, std::vector<std::string>> fixes;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& link : links) {
    if (link.label != LinkLabel::True) continue;
    if (seen.emplace(link.issue_id, link.commit_id).second) {
      fixes[link.issue_id].push_back(link.commit_id);
    }
  }
  return fixes;
}

const IssueRecord& lookup_issue(const std::map<std::string, IssueRecord>& issues,
                                const std::string& issue_id) {
  auto it = issues.find(issue_id);
  if (it == issues.end()) {
    throw Error(ErrorCode::MissingIssueMetadata, "no issue record for '" + issue_id + "'");
  }
  return it->second;
}

}  // namespace

std::string to_string(ConstructionMode mode) {
  return mode == ConstructionMode::RDS ? "RDS" : "FIXED_N";
}

ConstructionMode construction_mode_from_string(const std::string& text) {
  if (text == "RDS") return ConstructionMode::RDS;
  if (text == "FIXED_N") return ConstructionMode::FIXED_N;
  throw Error(ErrorCode::ConfigInvalid, "unknown construction mode '" + text + "'");
}

std::set<std::string> EvaluationDataset::fix_commits(const std::string& issue_id) const {
  std::set<std::string> out;
  for (const auto& link : links) {
    if (link.issue_id == issue_id && link.label == LinkLabel::True) out.insert(link.commit_id);
  }
  return out;
}

std::vector<std::string> EvaluationDataset::candidate_commits(const std::string& issue_id) const {
  std::vector<std::string> out;
  for (const auto& link : links) {
    if (link.issue_id == issue_id) out.push_back(link.commit_id);
  }
  return out;
}

std::string DatasetStats::avg_false_links_text() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", avg_false_links_per_issue);
  return buf;
}

GroundTruthSplit split_ground_truth(const std::vector<LinkRecord>& true_links, SplitRatio ratio,
                                    std::uint64_t seed) {
  if (true_links.empty()) throw Error(ErrorCode::EmptyGroundTruth, "no true links to split");
  if (ratio.train + ratio.test == 0) {
    throw Error(ErrorCode::InvalidArgument, "split ratio must have a positive total");
  }
  auto ids = unique_issue_ids(true_links);
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(ids);

  const double share = static_cast<double>(ratio.test) / (ratio.train + ratio.test);
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(ids.size()) * share));
  const std::set<std::string> test_ids(ids.begin(), ids.begin() + static_cast<long>(n_test));

  GroundTruthSplit split;
  for (const auto& link : true_links) {
    (test_ids.count(link.issue_id) ? split.test : split.train).push_back(link);
  }
  return split;
}

std::vector<std::string> sample_issues(const std::vector<LinkRecord>& links, std::size_t cap,
                                       std::uint64_t seed) {
  if (cap == 0) throw Error(ErrorCode::InvalidArgument, "sample cap must be >= 1");
  auto ids = unique_issue_ids(links);
  if (ids.size() <= cap) return ids;
  Rng rng(seed);
  return rng.sample(std::move(ids), cap);
}

bool is_candidate(const IssueRecord& issue, const CommitRecord& commit,
                  std::int64_t epsilon_seconds, const std::set<std::string>& fix_commits) {
  return within_window(issue.create_time, commit.commit_time, epsilon_seconds) &&
         fix_commits.count(commit.commit_id) == 0;
}

EvaluationDataset build_rds_dataset(const std::vector<LinkRecord>& test_true_links,
                                    const std::map<std::string, IssueRecord>& issues,
                                    const CommitPool& pool, int epsilon_days, std::size_t cap,
                                    std::uint64_t seed) {
  if (epsilon_days < 1) throw Error(ErrorCode::InvalidArgument, "epsilon_days must be >= 1");
  const auto sampled = sample_issues(test_true_links, cap, seed);
  if (sampled.empty()) {
    throw Error(ErrorCode::InsufficientTestIssues, "test split contains no issues");
  }
  const auto fixes = fixes_by_issue(test_true_links);
  const std::int64_t epsilon_seconds = std::int64_t{epsilon_days} * kSecondsPerDay;

  EvaluationDataset dataset;
  dataset.project_name = pool.project_name;
  dataset.epsilon_days = epsilon_days;
  dataset.construction_mode = ConstructionMode::RDS;
  dataset.seed = seed;
  dataset.cap = cap;
  dataset.issue_order = sampled;

  for (const auto& issue_id : sampled) {
    const IssueRecord& issue = lookup_issue(issues, issue_id);
    dataset.issues.emplace(issue_id, issue);
    const auto& fix_list = fixes.at(issue_id);
    const std::set<std::string> fix_set(fix_list.begin(), fix_list.end());
    for (const auto& commit_id : fix_list) {
      dataset.links.push_back({issue_id, commit_id, LinkLabel::True});
    }
    // pool is time-sorted: window is contiguous
    auto it = std::lower_bound(
        pool.commits.begin(), pool.commits.end(), issue.create_time,
        [](const CommitRecord& c, Timestamp t) { return c.commit_time < t; });
    for (; it != pool.commits.end() &&
           it->commit_time <= issue.create_time + epsilon_seconds;
         ++it) {
      if (is_candidate(issue, *it, epsilon_seconds, fix_set)) {
        dataset.links.push_back({issue_id, it->commit_id, LinkLabel::False});
      }
    }
  }
  return dataset;
}

EvaluationDataset build_fixed_false_dataset(const std::vector<LinkRecord>& test_true_links,
                                            const std::map<std::string, IssueRecord>& issues,
                                            std::size_t n_false, std::size_t cap,
                                            std::uint64_t seed) {
  if (test_true_links.empty()) {
    throw Error(ErrorCode::EmptyGroundTruth, "no true links for fixed-count construction");
  }
  const auto sampled = sample_issues(test_true_links, cap, seed);
  const auto fixes = fixes_by_issue(test_true_links);

  EvaluationDataset dataset;
  dataset.construction_mode = ConstructionMode::FIXED_N;
  dataset.seed = seed;
  dataset.cap = cap;
  dataset.n_false = n_false;
  dataset.epsilon_days = 0;
  dataset.issue_order = sampled;

  // Draws continue on one stream in sampled order, independent of the
  // sampling stream above.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& issue_id : sampled) {
    dataset.issues.emplace(issue_id, lookup_issue(issues, issue_id));
    const auto& fix_list = fixes.at(issue_id);
    const std::set<std::string> own(fix_list.begin(), fix_list.end());
    for (const auto& commit_id : fix_list) {
      dataset.links.push_back({issue_id, commit_id, LinkLabel::True});
    }

    std::set<std::string> others;
    for (const auto& [other_id, commits] : fixes) {
      if (other_id == issue_id) continue;
      for (const auto& c : commits) {
        if (own.count(c) == 0) others.insert(c);
      }
    }
    if (others.size() < n_false) {
      dataset.warnings.push_back("issue " + issue_id + ": only " + std::to_string(others.size()) +
                                 " other-issue commits available, wanted " +
                                 std::to_string(n_false));
    }
    auto drawn = rng.sample(std::vector<std::string>(others.begin(), others.end()), n_false);
    std::sort(drawn.begin(), drawn.end());
    for (auto& commit_id : drawn) {
      dataset.links.push_back({issue_id, std::move(commit_id), LinkLabel::False});
    }
  }
  return dataset;
}

DatasetStats dataset_stats(const EvaluationDataset& dataset, const CommitPool& pool) {
  DatasetStats stats;
  stats.n_commits_in_pool = pool.commits.size();
  std::set<std::string> ids;
  for (const auto& link : dataset.links) {
    ids.insert(link.issue_id);
    (link.label == LinkLabel::True ? stats.n_true_links : stats.n_false_links)++;
  }
  stats.n_unique_issues = ids.size();
  if (stats.n_unique_issues > 0) {
    stats.avg_false_links_per_issue =
        static_cast<double>(stats.n_false_links) / static_cast<double>(stats.n_unique_issues);
  }
  return stats;
}

std::map<std::string, IssueRecord> index_issues(const std::vector<IssueRecord>& issues) {
  std::map<std::string, IssueRecord> out;
  for (const auto& issue : issues) {
    if (!out.emplace(issue.issue_id, issue).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate issue id " + issue.issue_id);
    }
  }
  return out;
}

Json to_json(const DatasetStats& stats) {
  Json j;
  j["n_commits_in_pool"] = stats.n_commits_in_pool;
  j["n_unique_issues"] = stats.n_unique_issues;
  j["n_true_links"] = stats.n_true_links;
  j["n_false_links"] = stats.n_false_links;
  j["avg_false_links_per_issue"] = stats.avg_false_links_text();
  return j;
}

Json dataset_manifest(const EvaluationDataset& dataset, const DatasetStats& stats) {
  Json j;
  j["project"] = dataset.project_name;
  j["mode"] = to_string(dataset.construction_mode);
  j["epsilon_days"] = dataset.epsilon_days;
  j["seed"] = dataset.seed;
  j["cap"] = dataset.cap;
  if (dataset.construction_mode == ConstructionMode::FIXED_N) j["n_false"] = dataset.n_false;
  j["issue_order"] = dataset.issue_order;
  j["stats"] = to_json(stats);
  j["warnings"] = dataset.warnings;
  return j;
}

void write_dataset(const EvaluationDataset& dataset, const DatasetStats& stats,
                   const std::string& links_path, const std::string& issues_path,
                   const std::string& manifest_path) {
  write_links(links_path, dataset.links);
  std::vector<IssueRecord> issues;
  for (const auto& id : dataset.issue_order) issues.push_back(dataset.issues.at(id));
  write_issues(issues_path, issues);
  write_json_file(manifest_path, dataset_manifest(dataset, stats));
}

EvaluationDataset read_dataset(const std::string& links_path, const std::string& issues_path,
                               const std::string& manifest_path) {
  const Json manifest = read_json_file(manifest_path);
  EvaluationDataset dataset;
  try {
    dataset.project_name = manifest.at("project").get<std::string>();
    dataset.construction_mode = construction_mode_from_string(manifest.at("mode").get<std::string>());
    dataset.epsilon_days = manifest.at("epsilon_days").get<int>();
    dataset.seed = manifest.at("seed").get<std::uint64_t>();
    dataset.cap = manifest.at("cap").get<std::size_t>();
    dataset.n_false = manifest.value("n_false", std::size_t{0});
    dataset.issue_order = manifest.at("issue_order").get<std::vector<std::string>>();
    dataset.warnings = manifest.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, manifest_path + ": " + e.what());
  }
  dataset.links = read_links(links_path);
  dataset.issues = index_issues(read_issues(issues_path));
  for (const auto& link : dataset.links) {
    if (dataset.issues.count(link.issue_id) == 0) {
      throw Error(ErrorCode::MissingIssueMetadata, "dataset link references unknown issue " +
                                                       link.issue_id);
    }
  }
  return dataset;
}

}  // namespace linkrec
