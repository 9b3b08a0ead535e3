#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "linkrec/config.hpp"
#include "linkrec/metrics.hpp"

namespace linkrec {

inline constexpr const char* kToolVersion = "0.1.0";

// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr const char* kCommitPool = "commit_pool.jsonl";
inline constexpr const char* kSkippedCommits = "skipped_commits.json";
inline constexpr const char* kDatasetLinks = "dataset_links.jsonl";
inline constexpr const char* kDatasetIssues = "dataset_issues.jsonl";
inline constexpr const char* kDatasetManifest = "dataset_manifest.json";
inline constexpr const char* kTrainLinks = "train_links.jsonl";
inline constexpr const char* kIndex = "index.json";
inline constexpr const char* kRetrieval = "rankings_retrieval.jsonl";
inline constexpr const char* kVsm = "rankings_vsm.jsonl";
inline constexpr const char* kReranked = "rankings_reranked.jsonl";
inline constexpr const char* kRerankReport = "rerank_report.json";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kReportTable = "report.txt";
inline constexpr const char* kManifest = "run_manifest.json";
inline constexpr const char* kLock = ".linkrec.lock";
}  // namespace artifacts

const std::vector<std::string>& stage_names();

struct StageResult {
  std::string stage;
  bool skipped = false;
  double seconds = 0.0;
  std::vector<std::string> outputs;
};

struct RunSummary {
  std::vector<StageResult> stages;
  Json report;
  Json manifest;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& config);
std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config);

// Builds judgments for one ranking file against a dataset's true links.
// Dataset issues missing from the rankings get an empty ranking.
std::vector<QueryJudgment> judgments_for(const EvaluationDataset& dataset,
                                         const std::vector<RankedList>& rankings);

// Exclusive ownership of an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const std::string& output_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::string path_;
};

// Runs the mine -> dataset -> index -> retrieve -> rerank -> evaluate ->
// report stages over one output directory. Each stage checks its upstream
// artifacts, writes outputs atomically and records input/output hashes in
// the run manifest; a stage whose inputs and outputs are unchanged is
// skipped unless forced.
class Pipeline {
 public:
  Pipeline(RunConfig config, bool force = false);

  // Extra ranking files evaluated alongside the pipeline's own systems.
  void add_external_rankings(const std::string& system_name, const std::string& path);
  // Additional report.json files (other projects) merged by the report stage.
  void add_report_inputs(const std::vector<std::string>& paths);

  StageResult run_stage(const std::string& stage);
  RunSummary run_all();

  std::string artifact(const char* name) const;
  const RunConfig& config() const { return config_; }

 private:
  StageResult run_locked(const std::string& stage);

  void stage_mine();
  void stage_dataset();
  void stage_index();
  void stage_retrieve();
  void stage_rerank();
  void stage_evaluate();
  void stage_report();

  std::vector<std::string> stage_inputs(const std::string& stage) const;
  std::vector<std::string> stage_outputs(const std::string& stage) const;
  std::map<std::string, std::string> hash_inputs(const std::string& stage) const;
  bool up_to_date(const std::string& stage, const std::map<std::string, std::string>& inputs) const;
  void record_stage(const std::string& stage, const std::map<std::string, std::string>& inputs,
                    double seconds);
  void load_manifest();
  void save_manifest() const;

  RunConfig config_;
  bool force_;
  std::string config_hash_;
  Json manifest_;
  std::vector<std::pair<std::string, std::string>> external_rankings_;
  std::vector<std::string> report_inputs_;
};

}  // namespace linkrec
