#include "linkrec/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <set>

#include <fcntl.h>
#include <unistd.h>

#include "linkrec/error.hpp"
#include "linkrec/hashing.hpp"
#include "linkrec/process.hpp"
#include "linkrec/repo_miner.hpp"
#include "linkrec/scrub.hpp"
#include "linkrec/vector_index.hpp"
#include "linkrec/vsm.hpp"

namespace linkrec {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRepoStateKey = "git-refs";

const char* const kOwnSystems[] = {"retrieval", "vsm", "reranked"};

std::map<std::string, std::string> messages_by_id(const CommitPool& pool) {
  std::map<std::string, std::string> out;
  for (const auto& c : pool.commits) out.emplace(c.commit_id, c.message);
  return out;
}

Json significance_entry(const std::string& a_name, const std::string& b_name, const std::string& metric,
                        const std::vector<double>& a, const std::vector<double>& b) {
  Json j;
  j["system_a"] = a_name;
  j["system_b"] = b_name;
  j["metric"] = metric;
  j["n"] = a.size();
  try {
    const auto mw = mann_whitney_u(a, b);
    j["u"] = mw.u;
    j["p_value"] = mw.p_value;
    j["exact"] = mw.exact;
  } catch (const Error& e) {
    j["mann_whitney_error"] = std::string(to_string(e.code()));
  }
  try {
    j["cohens_d"] = cohens_d(a, b);
  } catch (const Error& e) {
    j["cohens_d_error"] = std::string(to_string(e.code()));
  }
  return j;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"mine", "dataset", "index", "retrieve", "rerank", "evaluate", "report"};
  return names;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingConfig& config) {
  if (config.type == "remote") return std::make_unique<RemoteEmbedder>(config.remote);
  return std::make_unique<StubEmbedder>(config.dimension, config.ngram);
}

std::unique_ptr<LlmClient> make_llm_client(const LlmClientConfig& config) {
  if (config.spec == "remote") return std::make_unique<RemoteLlmClient>(config.remote);
  return make_stub_client(config.spec);
}

std::vector<QueryJudgment> judgments_for(const EvaluationDataset& dataset, const std::vector<RankedList>& rankings) {
  std::map<std::string, const RankedList*> by_issue;
  for (const auto& r : rankings) by_issue[r.issue_id] = &r;
  std::vector<QueryJudgment> out;
  for (const auto& issue_id : dataset.issue_order) {
    QueryJudgment j;
    j.issue_id = issue_id;
    j.relevant = dataset.fix_commits(issue_id);
    if (auto it = by_issue.find(issue_id); it != by_issue.end()) {
      std::set<std::string> seen;
      for (const auto& entry : it->second->ranking) {
        if (seen.insert(entry.commit_id).second) j.ranking.push_back(entry.commit_id);
      }
    }
    out.push_back(std::move(j));
  }
  return out;
}

OutputLock::OutputLock(const std::string& output_dir) {
  fs::create_directories(output_dir);
  path_ = (fs::path(output_dir) / artifacts::kLock).string();
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY | O_CLOEXEC, 0644);
  if (fd < 0) {
    const auto holder = path_;
    path_.clear();
    throw Error(ErrorCode::ConfigInvalid, "output directory is locked by another run (" + holder + ")");
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

OutputLock::~OutputLock() {
  if (!path_.empty()) ::unlink(path_.c_str());
}

Pipeline::Pipeline(RunConfig config, bool force) : config_(std::move(config)), force_(force) {
  if (config_.seed) config_.snapshot["seed"] = *config_.seed;
  config_hash_ = sha256_hex(dump_json(config_.snapshot));
  load_manifest();
}

std::string Pipeline::artifact(const char* name) const { return (fs::path(config_.output_dir) / name).string(); }

void Pipeline::add_external_rankings(const std::string& system_name, const std::string& path) {
  for (const char* own : kOwnSystems) {
    if (system_name == own) throw Error(ErrorCode::ConfigInvalid, "system name '" + system_name + "' is reserved");
  }
  external_rankings_.emplace_back(system_name, path);
}

void Pipeline::add_report_inputs(const std::vector<std::string>& paths) {
  report_inputs_.insert(report_inputs_.end(), paths.begin(), paths.end());
}

void Pipeline::load_manifest() {
  const auto path = artifact(artifacts::kManifest);
  if (fs::exists(path)) {
    try {
      manifest_ = read_json_file(path);
    } catch (const Error&) {
      manifest_ = Json();
    }
  }
  if (!manifest_.is_object()) manifest_ = Json::object();
  if (!manifest_.contains("stages")) manifest_["stages"] = Json::object();
}

void Pipeline::save_manifest() const {
  Json m = manifest_;
  m["tool_version"] = kToolVersion;
  m["config"] = config_.snapshot;
  m["config_hash"] = config_hash_;
  write_json_file(artifact(artifacts::kManifest), m);
}

std::vector<std::string> Pipeline::stage_inputs(const std::string& stage) const {
  using namespace artifacts;
  if (stage == "mine") return {};
  if (stage == "dataset") return {artifact(kCommitPool), config_.issues_file, config_.links_file};
  if (stage == "index") return {artifact(kCommitPool)};
  if (stage == "retrieve") {
    return {artifact(kIndex), artifact(kDatasetLinks), artifact(kDatasetIssues), artifact(kDatasetManifest),
            artifact(kCommitPool)};
  }
  if (stage == "rerank") {
    std::vector<std::string> in = {artifact(kRetrieval), artifact(kDatasetIssues), artifact(kCommitPool)};
    const auto& spec = config_.rerank.client.spec;
    if (config_.rerank.enabled && spec.rfind("scripted:", 0) == 0) in.push_back(spec.substr(9));
    return in;
  }
  if (stage == "evaluate") {
    std::vector<std::string> in = {artifact(kDatasetLinks), artifact(kDatasetIssues), artifact(kDatasetManifest),
                                   artifact(kRetrieval),    artifact(kVsm),           artifact(kReranked)};
    for (const auto& [_, path] : external_rankings_) in.push_back(path);
    return in;
  }
  if (stage == "report") {
    std::vector<std::string> in = {artifact(kReport)};
    in.insert(in.end(), report_inputs_.begin(), report_inputs_.end());
    return in;
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown stage '" + stage + "'");
}

std::vector<std::string> Pipeline::stage_outputs(const std::string& stage) const {
  using namespace artifacts;
  if (stage == "mine") return {artifact(kCommitPool), artifact(kSkippedCommits)};
  if (stage == "dataset") {
    return {artifact(kDatasetLinks), artifact(kDatasetIssues), artifact(kDatasetManifest), artifact(kTrainLinks)};
  }
  if (stage == "index") return {artifact(kIndex)};
  if (stage == "retrieve") return {artifact(kRetrieval), artifact(kVsm)};
  if (stage == "rerank") return {artifact(kReranked), artifact(kRerankReport)};
  if (stage == "evaluate") return {artifact(kReport)};
  if (stage == "report") return {artifact(kReportTable)};
  throw Error(ErrorCode::ConfigInvalid, "unknown stage '" + stage + "'");
}

std::map<std::string, std::string> Pipeline::hash_inputs(const std::string& stage) const {
  std::map<std::string, std::string> hashes;
  if (stage == "mine") {
    if (config_.repo_path.empty()) throw Error(ErrorCode::ConfigInvalid, "repo_path is required for mining");
    const GitRepository repo(config_.repo_path);
    const auto refs = run_process({"git", "-C", repo.path(), "for-each-ref", "--format=%(objectname) %(refname)"});
    hashes[kRepoStateKey] = sha256_hex(refs.out);
    return hashes;
  }
  for (const auto& path : stage_inputs(stage)) {
    if (path.empty()) throw Error(ErrorCode::ConfigInvalid, "stage '" + stage + "' needs a path that is not configured");
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingUpstream,
                  "stage '" + stage + "' needs " + fs::path(path).filename().string() + " (" + path + ")");
    }
    hashes[path] = sha256_file(path);
  }
  return hashes;
}

bool Pipeline::up_to_date(const std::string& stage, const std::map<std::string, std::string>& inputs) const {
  if (force_) return false;
  const auto& stages = manifest_["stages"];
  if (!stages.contains(stage)) return false;
  const auto& entry = stages[stage];
  if (entry.value("config_hash", std::string()) != config_hash_) return false;
  if (entry.value("inputs", Json::object()) != Json(inputs)) return false;
  const auto outputs = entry.value("outputs", Json::object());
  if (outputs.size() != stage_outputs(stage).size()) return false;
  for (const auto& path : stage_outputs(stage)) {
    if (!outputs.contains(path) || !fs::exists(path)) return false;
    if (outputs[path].get<std::string>() != sha256_file(path)) return false;
  }
  return true;
}

void Pipeline::record_stage(const std::string& stage, const std::map<std::string, std::string>& inputs,
                            double seconds) {
  Json entry;
  entry["config_hash"] = config_hash_;
  entry["inputs"] = inputs;
  Json outputs = Json::object();
  for (const auto& path : stage_outputs(stage)) outputs[path] = sha256_file(path);
  entry["outputs"] = std::move(outputs);
  entry["seconds"] = seconds;
  manifest_["stages"][stage] = std::move(entry);
  save_manifest();
}

StageResult Pipeline::run_stage(const std::string& stage) {
  OutputLock lock(config_.output_dir);
  return run_locked(stage);
}

StageResult Pipeline::run_locked(const std::string& stage) {
  StageResult result;
  result.stage = stage;
  result.outputs = stage_outputs(stage);
  const auto inputs = hash_inputs(stage);
  if (up_to_date(stage, inputs)) {
    result.skipped = true;
    return result;
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    if (stage == "mine") stage_mine();
    else if (stage == "dataset") stage_dataset();
    else if (stage == "index") stage_index();
    else if (stage == "retrieve") stage_retrieve();
    else if (stage == "rerank") stage_rerank();
    else if (stage == "evaluate") stage_evaluate();
    else if (stage == "report") stage_report();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + stage + "': " + e.detail());
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  record_stage(stage, inputs, result.seconds);
  return result;
}

RunSummary Pipeline::run_all() {
  OutputLock lock(config_.output_dir);
  RunSummary summary;
  for (const auto& stage : stage_names()) summary.stages.push_back(run_locked(stage));
  summary.report = read_json_file(artifact(artifacts::kReport));
  summary.manifest = read_json_file(artifact(artifacts::kManifest));
  return summary;
}

void Pipeline::stage_mine() {
  MinerOptions options;
  options.project_name = config_.project_name;
  options.include_file_contents = config_.include_file_contents;
  options.jobs = config_.mine_jobs;
  options.tag_patterns = config_.tag_patterns;
  const auto mined = build_commit_pool(config_.repo_path, options);
  write_commit_pool(artifact(artifacts::kCommitPool), mined.pool);

  Json skipped = Json::array();
  for (const auto& s : mined.skipped) skipped.push_back(Json{{"commit_id", s.commit_id}, {"reason", s.reason}});
  Json report;
  report["enumerated"] = mined.pool.commits.size() + mined.skipped.size();
  report["pooled"] = mined.pool.commits.size();
  report["skipped"] = std::move(skipped);
  write_json_file(artifact(artifacts::kSkippedCommits), report);
}

void Pipeline::stage_dataset() {
  if (!config_.seed) throw Error(ErrorCode::ConfigInvalid, "a seed is required (config 'seed' or --seed)");
  const auto pool = read_commit_pool(artifact(artifacts::kCommitPool), config_.project_name);
  const TagScrubber scrub(config_.tag_patterns);
  auto issue_list = read_issues(config_.issues_file);
  for (auto& issue : issue_list) {
    issue.summary = scrub(issue.summary);
    issue.description = scrub(issue.description);
    for (auto& comment : issue.comments) comment = scrub(comment);
  }
  const auto issues = index_issues(issue_list);

  std::vector<LinkRecord> true_links;
  for (const auto& link : read_links(config_.links_file)) {
    if (link.label == LinkLabel::True) true_links.push_back(link);
  }
  const auto split = split_ground_truth(true_links, config_.split_ratio, *config_.seed);
  write_links(artifact(artifacts::kTrainLinks), split.train);
  if (split.test.empty()) {
    throw Error(ErrorCode::InsufficientTestIssues, "the test split is empty; add issues or change split_ratio");
  }

  EvaluationDataset dataset =
      config_.mode == ConstructionMode::RDS
          ? build_rds_dataset(split.test, issues, pool, config_.epsilon_days, config_.sample_cap, *config_.seed)
          : build_fixed_false_dataset(split.test, issues, config_.n_false, config_.sample_cap, *config_.seed);
  dataset.project_name = config_.project_name;
  const auto stats = dataset_stats(dataset, pool);
  write_dataset(dataset, stats, artifact(artifacts::kDatasetLinks), artifact(artifacts::kDatasetIssues),
                artifact(artifacts::kDatasetManifest));
}

void Pipeline::stage_index() {
  const auto pool = read_commit_pool(artifact(artifacts::kCommitPool), config_.project_name);
  const auto provider = make_embedding_provider(config_.embedding);
  build_index(*provider, pool).save(artifact(artifacts::kIndex));
}

void Pipeline::stage_retrieve() {
  const auto provider = make_embedding_provider(config_.embedding);
  const auto index = VectorIndex::load(artifact(artifacts::kIndex));
  if (index.provider_name() != provider->name() || index.dimension() != provider->dimension()) {
    throw Error(ErrorCode::ConfigInvalid, "index was built with provider '" + index.provider_name() +
                                              "'; rerun the index stage");
  }
  const auto dataset = read_dataset(artifact(artifacts::kDatasetLinks), artifact(artifacts::kDatasetIssues),
                                    artifact(artifacts::kDatasetManifest));
  const auto pool = read_commit_pool(artifact(artifacts::kCommitPool), config_.project_name);
  const auto messages = messages_by_id(pool);

  std::vector<std::string> texts;
  for (const auto& id : dataset.issue_order) texts.push_back(issue_text(dataset.issues.at(id)));
  const auto queries = provider->embed_batch(texts);

  std::vector<RankedList> retrieval, vsm;
  for (std::size_t i = 0; i < dataset.issue_order.size(); ++i) {
    const auto& issue_id = dataset.issue_order[i];
    const auto candidates = dataset.candidate_commits(issue_id);
    const std::set<std::string> filter(candidates.begin(), candidates.end());

    RankedList dense = index.query_top_k(queries[i], filter.size(), &filter);
    dense.issue_id = issue_id;
    retrieval.push_back(std::move(dense));

    std::vector<std::pair<std::string, std::string>> docs;
    for (const auto& id : filter) {
      if (auto it = messages.find(id); it != messages.end()) docs.emplace_back(id, it->second);
    }
    RankedList sparse;
    sparse.stage = RankingStage::VSM;
    if (!docs.empty()) {
      std::vector<std::string> ids;
      for (const auto& [id, _] : docs) ids.push_back(id);
      sparse = rank_vsm(TfidfModel::build(docs), texts[i], ids);
    }
    sparse.issue_id = issue_id;
    vsm.push_back(std::move(sparse));
  }
  write_rankings(artifact(artifacts::kRetrieval), retrieval);
  write_rankings(artifact(artifacts::kVsm), vsm);
}

void Pipeline::stage_rerank() {
  const auto retrieval = read_rankings(artifact(artifacts::kRetrieval));
  Json report;
  report["enabled"] = config_.rerank.enabled;
  if (!config_.rerank.enabled) {
    write_rankings(artifact(artifacts::kReranked), retrieval);
    report["n_issues"] = retrieval.size();
    write_json_file(artifact(artifacts::kRerankReport), report);
    manifest_["fallback_count"] = 0;
    manifest_["token_usage"] = Json{{"input_tokens", 0}, {"output_tokens", 0}, {"estimated", false}};
    return;
  }

  const auto issues = index_issues(read_issues(artifact(artifacts::kDatasetIssues)));
  const auto pool = read_commit_pool(artifact(artifacts::kCommitPool), config_.project_name);
  const auto messages = messages_by_id(pool);
  const auto client = make_llm_client(config_.rerank.client);

  RerankOptions options;
  options.k = config_.rerank.k;
  options.strict = config_.rerank.strict;
  options.retry = config_.rerank.retry;

  // Issues whose retrieval list is empty have nothing to rerank.
  std::vector<RankedList> to_rerank;
  for (const auto& list : retrieval) {
    if (!list.ranking.empty()) to_rerank.push_back(list);
  }
  const auto outcomes = rerank_all(*client, issues, to_rerank, messages, options, config_.rerank.rate_limit);

  std::map<std::string, const RerankOutcome*> by_issue;
  for (const auto& o : outcomes) by_issue[o.list.issue_id] = &o;
  std::vector<RankedList> reranked;
  std::size_t format_fallbacks = 0, client_fallbacks = 0;
  TokenUsage usage;
  std::vector<CostEstimate> costs;
  for (const auto& list : retrieval) {
    auto it = by_issue.find(list.issue_id);
    if (it == by_issue.end()) {
      RankedList copy = list;
      copy.stage = RankingStage::RERANKED;
      reranked.push_back(std::move(copy));
      continue;
    }
    const auto& o = *it->second;
    reranked.push_back(o.list);
    if (o.fallback_reason == "format") ++format_fallbacks;
    if (o.fallback_reason == "client") ++client_fallbacks;
    usage += o.usage;
    costs.push_back(estimate_cost(o.usage, config_.pricing));
  }
  write_rankings(artifact(artifacts::kReranked), reranked);

  const auto total = aggregate_cost(costs);
  const auto n = outcomes.size();
  report["client"] = client->name();
  report["k"] = config_.rerank.k;
  report["strict"] = config_.rerank.strict;
  report["prompt_template"] = kPromptTemplateVersion;
  report["n_issues"] = n;
  report["fallback_count"] = format_fallbacks + client_fallbacks;
  report["format_fallbacks"] = format_fallbacks;
  report["client_failures"] = client_fallbacks;
  report["fallback_rate"] = n == 0 ? 0.0 : static_cast<double>(format_fallbacks + client_fallbacks) / n;
  report["token_usage"] = Json{{"input_tokens", usage.input_tokens},
                               {"output_tokens", usage.output_tokens},
                               {"estimated", usage.estimated}};
  report["cost"] = Json{{"input_price_per_million", config_.pricing.input_per_token * 1e6},
                        {"output_price_per_million", config_.pricing.output_per_token * 1e6},
                        {"total", total.total},
                        {"per_issue", n == 0 ? 0.0 : total.total / static_cast<double>(n)}};
  write_json_file(artifact(artifacts::kRerankReport), report);
  manifest_["fallback_count"] = format_fallbacks + client_fallbacks;
  manifest_["token_usage"] = report["token_usage"];
}

void Pipeline::stage_evaluate() {
  const auto dataset = read_dataset(artifact(artifacts::kDatasetLinks), artifact(artifacts::kDatasetIssues),
                                    artifact(artifacts::kDatasetManifest));
  std::vector<std::pair<std::string, std::string>> systems = {
      {"retrieval", artifact(artifacts::kRetrieval)},
      {"vsm", artifact(artifacts::kVsm)},
      {"reranked", artifact(artifacts::kReranked)},
  };
  systems.insert(systems.end(), external_rankings_.begin(), external_rankings_.end());

  Json report;
  report["project"] = config_.project_name;
  report["ks"] = config_.ks;
  Json order = Json::array();
  Json reports = Json::object();
  std::map<std::string, std::vector<QueryJudgment>> judged;
  for (const auto& [name, path] : systems) {
    auto judgments = judgments_for(dataset, read_rankings(path));
    reports[name] = to_json(aggregate({{config_.project_name, judgments}}, config_.ks));
    order.push_back(name);
    judged[name] = std::move(judgments);
  }
  report["system_order"] = std::move(order);
  report["systems"] = std::move(reports);

  // per-query samples
  Json significance = Json::array();
  auto per_query = [&](const std::string& system, bool first_rank_only) {
    std::vector<double> xs;
    for (const auto& j : judged.at(system)) xs.push_back(first_rank_only ? precision_at_k(j, 1) : reciprocal_rank(j));
    return xs;
  };
  std::vector<std::pair<std::string, std::string>> pairs = {
      {"reranked", "retrieval"}, {"reranked", "vsm"}, {"retrieval", "vsm"}};
  for (const auto& [name, _] : external_rankings_) pairs.emplace_back(name, "retrieval");
  for (const auto& [a, b] : pairs) {
    significance.push_back(significance_entry(a, b, "MRR", per_query(a, false), per_query(b, false)));
    significance.push_back(significance_entry(a, b, "P@1", per_query(a, true), per_query(b, true)));
  }
  report["significance"] = std::move(significance);
  write_json_file(artifact(artifacts::kReport), report);
}

void Pipeline::stage_report() {
  std::vector<Json> inputs = {read_json_file(artifact(artifacts::kReport))};
  for (const auto& path : report_inputs_) inputs.push_back(read_json_file(path));

  std::vector<std::string> order;
  std::map<std::string, std::vector<MetricsReport>> per_system;
  for (const auto& in : inputs) {
    for (const auto& name : in.at("system_order")) {
      const auto system = name.get<std::string>();
      if (per_system.count(system) == 0) order.push_back(system);
      per_system[system].push_back(metrics_report_from_json(in.at("systems").at(system)));
    }
  }
  std::vector<std::pair<std::string, MetricValues>> columns;
  std::vector<std::pair<std::string, MetricValues>> set_columns;
  std::size_t n_projects = 0;
  for (const auto& system : order) {
    const auto combined = combine_projects(per_system.at(system));
    n_projects = std::max(n_projects, combined.per_project.size());
    columns.emplace_back(system, combined.cross_project_average);
    if (combined.set_level) {
      set_columns.emplace_back(system, MetricValues{{"Precision", combined.set_level->precision},
                                                    {"Recall", combined.set_level->recall},
                                                    {"F1", combined.set_level->f1}});
    }
  }

  std::string text = "Ranking metrics (%), averaged over " + std::to_string(n_projects) + " project(s)\n\n";
  text += format_metrics_table(columns, metric_names(config_.ks));
  if (!set_columns.empty()) {
    text += "\nSet-level scores (%), top-ranked commit as the predicted link\n\n";
    text += format_metrics_table(set_columns, {"Precision", "Recall", "F1"});
  }
  if (inputs.size() == 1 && inputs.front().contains("significance")) {
    text += "\nSignificance (per-query, two-sided Mann-Whitney U; Cohen's d)\n\n";
    for (const auto& s : inputs.front()["significance"]) {
      char line[256];
      const auto a = s.at("system_a").get<std::string>();
      const auto b = s.at("system_b").get<std::string>();
      const auto metric = s.at("metric").get<std::string>();
      std::string p = s.contains("p_value") ? std::to_string(s["p_value"].get<double>())
                                            : s.value("mann_whitney_error", std::string("-"));
      std::string d = s.contains("cohens_d") ? std::to_string(s["cohens_d"].get<double>())
                                             : s.value("cohens_d_error", std::string("-"));
      std::snprintf(line, sizeof line, "%-10s vs %-10s %-4s  p=%s  d=%s\n", a.c_str(), b.c_str(), metric.c_str(),
                    p.c_str(), d.c_str());
      text += line;
    }
  }
  write_file_atomic(artifact(artifacts::kReportTable), text);
}

}  // namespace linkrec
