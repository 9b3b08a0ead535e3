#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linkrec/records.hpp"

namespace linkrec {

inline constexpr std::int64_t kSecondsPerDay = 86'400;
inline constexpr int kDefaultEpsilonDays = 365;
inline constexpr std::size_t kDefaultSampleCap = 1000;
inline constexpr std::size_t kDefaultFixedFalseLinks = 99;

enum class ConstructionMode { RDS, FIXED_N };

std::string to_string(ConstructionMode mode);
ConstructionMode construction_mode_from_string(const std::string& text);

struct SplitRatio {
  unsigned train = 4;
  unsigned test = 1;
};

struct EvaluationDataset {
  std::string project_name;
  std::map<std::string, IssueRecord> issues;
  // Issue ids in sampled order; links are grouped in this order.
  std::vector<std::string> issue_order;
  std::vector<LinkRecord> links;
  int epsilon_days = kDefaultEpsilonDays;
  ConstructionMode construction_mode = ConstructionMode::RDS;
  std::uint64_t seed = 0;
  std::size_t cap = kDefaultSampleCap;
  std::size_t n_false = 0;  // FIXED_N only
  std::vector<std::string> warnings;

  std::set<std::string> fix_commits(const std::string& issue_id) const;
  std::vector<std::string> candidate_commits(const std::string& issue_id) const;
};

struct DatasetStats {
  std::size_t n_commits_in_pool = 0;
  std::size_t n_unique_issues = 0;
  std::size_t n_true_links = 0;
  std::size_t n_false_links = 0;
  double avg_false_links_per_issue = 0.0;

  // Two-decimal rendering used in tables and manifests ("179.00").
  std::string avg_false_links_text() const;
};

struct GroundTruthSplit {
  std::vector<LinkRecord> train;
  std::vector<LinkRecord> test;
};

// Splits by issue id so every link of an issue lands on the same side.
// The test side receives round(n_issues * test / (train + test)) issues.
// Throws EmptyGroundTruth.
GroundTruthSplit split_ground_truth(const std::vector<LinkRecord>& true_links, SplitRatio ratio,
                                    std::uint64_t seed);

// Unique issue ids from `links`. All of them (first-appearance order) when
// there are at most `cap`, else `cap` ids drawn without replacement.
std::vector<std::string> sample_issues(const std::vector<LinkRecord>& links, std::size_t cap,
                                       std::uint64_t seed);

// created <= committed <= created + epsilon. Both bounds inclusive; this is
// the only place the window comparison is made.
inline bool within_window(Timestamp issue_created, Timestamp committed,
                          std::int64_t epsilon_seconds) {
  return issue_created <= committed && committed <= issue_created + epsilon_seconds;
}

bool is_candidate(const IssueRecord& issue, const CommitRecord& commit,
                  std::int64_t epsilon_seconds, const std::set<std::string>& fix_commits);

// Realistic-distribution construction: every non-fix commit in the window
// after issue creation becomes a false link.
// Throws InsufficientTestIssues, MissingIssueMetadata.
EvaluationDataset build_rds_dataset(const std::vector<LinkRecord>& test_true_links,
                                    const std::map<std::string, IssueRecord>& issues,
                                    const CommitPool& pool, int epsilon_days, std::size_t cap,
                                    std::uint64_t seed);

// Legacy construction: `n_false` false links per issue drawn from commits
// that fix other issues of the test set.
EvaluationDataset build_fixed_false_dataset(const std::vector<LinkRecord>& test_true_links,
                                            const std::map<std::string, IssueRecord>& issues,
                                            std::size_t n_false, std::size_t cap,
                                            std::uint64_t seed);

DatasetStats dataset_stats(const EvaluationDataset& dataset, const CommitPool& pool);

std::map<std::string, IssueRecord> index_issues(const std::vector<IssueRecord>& issues);

Json dataset_manifest(const EvaluationDataset& dataset, const DatasetStats& stats);
Json to_json(const DatasetStats& stats);

// Links (JSON Lines), the sampled issues (JSON Lines) and the sidecar manifest.
void write_dataset(const EvaluationDataset& dataset, const DatasetStats& stats,
                   const std::string& links_path, const std::string& issues_path,
                   const std::string& manifest_path);
EvaluationDataset read_dataset(const std::string& links_path, const std::string& issues_path,
                               const std::string& manifest_path);

}  // namespace linkrec
