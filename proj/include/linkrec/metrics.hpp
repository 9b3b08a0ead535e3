#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "linkrec/records.hpp"

namespace linkrec {

// One evaluated query: a ranked candidate list and the issue's fix commits.
struct QueryJudgment {
  std::string issue_id;
  std::vector<std::string> ranking;
  std::set<std::string> relevant;

  std::size_t total_relevant() const { return relevant.size(); }
  // 1-based position of the first relevant commit, nullopt when none is ranked.
  std::optional<std::size_t> first_relevant_rank() const;
};

double precision_at_k(const QueryJudgment& j, std::size_t k);
double hit_at_k(const QueryJudgment& j, std::size_t k);
double recall_at_k(const QueryJudgment& j, std::size_t k);
double reciprocal_rank(const QueryJudgment& j);
// Binary-relevance NDCG with (2^r - 1) / log2(i + 1) gains.
double ndcg_at_k(const QueryJudgment& j, std::size_t k);

// Metric name -> value. Names: "P@k", "Hit@k", "Recall@k", "NDCG@k", "MRR".
using MetricValues = std::map<std::string, double>;

// Report metric order: P@k for each k, Hit@k, Recall@k, MRR, NDCG@k.
std::vector<std::string> metric_names(const std::vector<std::size_t>& ks);

// Unweighted means over the queries.
MetricValues evaluate_queries(const std::vector<QueryJudgment>& judgments,
                              const std::vector<std::size_t>& ks);

struct SetLevelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

// Scores one predicted commit per issue against the true (issue, commit)
// pairs of the evaluated issues (the keys of `truth`).
SetLevelScores set_level_prf(const std::map<std::string, std::string>& predictions,
                             const std::map<std::string, std::set<std::string>>& truth);

struct ProjectMetrics {
  MetricValues values;
  std::size_t n_queries = 0;
  std::optional<SetLevelScores> set_level;
};

struct MetricsReport {
  std::vector<std::size_t> ks;
  std::map<std::string, ProjectMetrics> per_project;
  // Unweighted mean over projects of each per-project value.
  MetricValues cross_project_average;
  std::optional<SetLevelScores> set_level;
};

inline const std::vector<std::size_t> kDefaultCutoffs = {1, 10};

// Macro average at both levels: queries -> project, projects -> overall.
// Set-level P/R/F1 uses each ranking's top commit as the predicted link.
// Throws EmptyProject.
MetricsReport aggregate(const std::map<std::string, std::vector<QueryJudgment>>& projects,
                        const std::vector<std::size_t>& ks = kDefaultCutoffs);

// Merges reports of disjoint project sets and recomputes the macro averages.
// Throws InvalidArgument when a project appears twice or cutoffs differ.
MetricsReport combine_projects(const std::vector<MetricsReport>& reports);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of sample_a
  double p_value = 1.0;
  bool exact = false;
};

// Two-sided Mann-Whitney U test. Exact permutation distribution when both
// samples have at most 8 values, otherwise the tie-corrected normal
// approximation with continuity correction. Throws InvalidArgument for an
// empty sample, DegenerateSamples when every value is identical.
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b);

// (mean_a - mean_b) / pooled sd (n - 1 denominators).
// Throws InvalidArgument for samples smaller than 2, ZeroVariance.
double cohens_d(const std::vector<double>& sample_a, const std::vector<double>& sample_b);

Json to_json(const SetLevelScores& s);
Json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const Json& j);

// Aligned plain-text table: one row per metric, one column per system,
// values as percentages with two decimals.
std::string format_metrics_table(const std::vector<std::pair<std::string, MetricValues>>& systems,
                                 const std::vector<std::string>& metrics);

}  // namespace linkrec
