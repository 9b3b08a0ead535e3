#include "linkrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "linkrec/error.hpp"

namespace linkrec {

namespace {

std::size_t relevant_in_top(const QueryJudgment& j, std::size_t k) {
  const auto n = std::min(k, j.ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += j.relevant.count(j.ranking[i]);
  return hits;
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Midranks (1-based) of the pooled values.
std::vector<double> midranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

}  // namespace

std::optional<std::size_t> QueryJudgment::first_relevant_rank() const {
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (relevant.count(ranking[i]) != 0) return i + 1;
  }
  return std::nullopt;
}

double precision_at_k(const QueryJudgment& j, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  return static_cast<double>(relevant_in_top(j, k)) / static_cast<double>(k);
}

double hit_at_k(const QueryJudgment& j, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const auto rank = j.first_relevant_rank();
  return rank && *rank <= k ? 1.0 : 0.0;
}

double recall_at_k(const QueryJudgment& j, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (j.relevant.empty()) throw Error(ErrorCode::InvalidArgument, "query " + j.issue_id + " has no relevant commits");
  return static_cast<double>(relevant_in_top(j, k)) / static_cast<double>(j.total_relevant());
}

double reciprocal_rank(const QueryJudgment& j) {
  const auto rank = j.first_relevant_rank();
  return rank ? 1.0 / static_cast<double>(*rank) : 0.0;
}

double ndcg_at_k(const QueryJudgment& j, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  double dcg = 0.0;
  const auto n = std::min(k, j.ranking.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (j.relevant.count(j.ranking[i]) != 0) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  if (dcg == 0.0) return 0.0;
  double ideal = 0.0;
  const auto ideal_hits = std::min(j.total_relevant(), k);
  for (std::size_t i = 0; i < ideal_hits; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

std::vector<std::string> metric_names(const std::vector<std::size_t>& ks) {
  std::vector<std::string> names;
  for (const char* prefix : {"P@", "Hit@", "Recall@"}) {
    for (auto k : ks) names.push_back(prefix + std::to_string(k));
  }
  names.push_back("MRR");
  for (auto k : ks) names.push_back("NDCG@" + std::to_string(k));
  return names;
}

MetricValues evaluate_queries(const std::vector<QueryJudgment>& judgments,
                              const std::vector<std::size_t>& ks) {
  if (judgments.empty()) throw Error(ErrorCode::EmptyProject, "no judgments to evaluate");
  MetricValues sums;
  for (const auto& name : metric_names(ks)) sums[name] = 0.0;
  for (const auto& j : judgments) {
    for (auto k : ks) {
      const auto suffix = std::to_string(k);
      sums["P@" + suffix] += precision_at_k(j, k);
      sums["Hit@" + suffix] += hit_at_k(j, k);
      sums["Recall@" + suffix] += recall_at_k(j, k);
      sums["NDCG@" + suffix] += ndcg_at_k(j, k);
    }
    sums["MRR"] += reciprocal_rank(j);
  }
  for (auto& [_, v] : sums) v /= static_cast<double>(judgments.size());
  return sums;
}

SetLevelScores set_level_prf(const std::map<std::string, std::string>& predictions,
                             const std::map<std::string, std::set<std::string>>& truth) {
  SetLevelScores s;
  std::size_t true_pairs = 0;
  for (const auto& [_, commits] : truth) true_pairs += commits.size();
  for (const auto& [issue, commit] : predictions) {
    auto it = truth.find(issue);
    if (it != truth.end() && it->second.count(commit) != 0) {
      ++s.true_positives;
    } else {
      ++s.false_positives;
    }
  }
  s.false_negatives = true_pairs - s.true_positives;
  const auto predicted = s.true_positives + s.false_positives;
  s.precision = predicted == 0 ? 0.0 : static_cast<double>(s.true_positives) / static_cast<double>(predicted);
  s.recall = true_pairs == 0 ? 0.0 : static_cast<double>(s.true_positives) / static_cast<double>(true_pairs);
  s.f1 = (s.precision + s.recall) == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

MetricsReport aggregate(const std::map<std::string, std::vector<QueryJudgment>>& projects,
                        const std::vector<std::size_t>& ks) {
  if (projects.empty()) throw Error(ErrorCode::EmptyProject, "no projects to aggregate");
  MetricsReport report;
  report.ks = ks;
  SetLevelScores set_sum;
  for (const auto& [name, judgments] : projects) {
    if (judgments.empty()) throw Error(ErrorCode::EmptyProject, "project " + name + " has no judgments");
    ProjectMetrics pm;
    pm.values = evaluate_queries(judgments, ks);
    pm.n_queries = judgments.size();
    std::map<std::string, std::string> predictions;
    std::map<std::string, std::set<std::string>> truth;
    for (const auto& j : judgments) {
      truth[j.issue_id] = j.relevant;
      if (!j.ranking.empty()) predictions[j.issue_id] = j.ranking.front();
    }
    pm.set_level = set_level_prf(predictions, truth);
    set_sum.precision += pm.set_level->precision;
    set_sum.recall += pm.set_level->recall;
    set_sum.f1 += pm.set_level->f1;
    set_sum.true_positives += pm.set_level->true_positives;
    set_sum.false_positives += pm.set_level->false_positives;
    set_sum.false_negatives += pm.set_level->false_negatives;
    for (const auto& [metric, value] : pm.values) report.cross_project_average[metric] += value;
    report.per_project.emplace(name, std::move(pm));
  }
  const auto n = static_cast<double>(projects.size());
  for (auto& [_, v] : report.cross_project_average) v /= n;
  set_sum.precision /= n;
  set_sum.recall /= n;
  set_sum.f1 /= n;
  report.set_level = set_sum;
  return report;
}

MetricsReport combine_projects(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyProject, "no reports to combine");
  MetricsReport combined;
  combined.ks = reports.front().ks;
  for (const auto& r : reports) {
    if (r.ks != combined.ks) throw Error(ErrorCode::InvalidArgument, "reports use different cutoffs");
    for (const auto& [name, pm] : r.per_project) {
      if (!combined.per_project.emplace(name, pm).second) {
        throw Error(ErrorCode::InvalidArgument, "project " + name + " appears in more than one report");
      }
    }
  }
  const auto n = static_cast<double>(combined.per_project.size());
  SetLevelScores set_sum;
  bool all_set_level = true;
  for (const auto& [_, pm] : combined.per_project) {
    for (const auto& [metric, value] : pm.values) combined.cross_project_average[metric] += value / n;
    if (!pm.set_level) {
      all_set_level = false;
      continue;
    }
    set_sum.precision += pm.set_level->precision / n;
    set_sum.recall += pm.set_level->recall / n;
    set_sum.f1 += pm.set_level->f1 / n;
    set_sum.true_positives += pm.set_level->true_positives;
    set_sum.false_positives += pm.set_level->false_positives;
    set_sum.false_negatives += pm.set_level->false_negatives;
  }
  if (all_set_level) combined.set_level = set_sum;
  return combined;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a, const std::vector<double>& sample_b) {
  if (sample_a.empty() || sample_b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "Mann-Whitney U needs two nonempty samples");
  }
  std::vector<double> pooled(sample_a);
  pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
  if (std::all_of(pooled.begin(), pooled.end(), [&](double x) { return x == pooled.front(); })) {
    throw Error(ErrorCode::DegenerateSamples, "all values are identical");
  }
  const auto na = sample_a.size();
  const auto nb = sample_b.size();
  const auto n = na + nb;
  const auto ranks = midranks(pooled);
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(na), 0.0);
  const double offset = static_cast<double>(na) * (static_cast<double>(na) + 1.0) / 2.0;

  MannWhitneyResult result;
  result.u = rank_sum_a - offset;
  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  const double observed = std::abs(result.u - mu);

  if (na <= 8 && nb <= 8) {
    // Every assignment of the pooled midranks to sample a is equally likely
    // under the null; count those at least as extreme as observed.
    result.exact = true;
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(na), true);
    std::size_t total = 0, extreme = 0;
    do {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (pick[i]) sum += ranks[i];
      }
      ++total;
      if (std::abs(sum - offset - mu) >= observed - 1e-9) ++extreme;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    result.p_value = std::min(1.0, static_cast<double>(extreme) / static_cast<double>(total));
    return result;
  }

  std::map<double, std::size_t> ties;
  for (double x : pooled) ++ties[x];
  double tie_term = 0.0;
  for (const auto& [_, t] : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double nd = static_cast<double>(n);
  const double variance = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                          ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
  const double z = std::max(0.0, observed - 0.5) / std::sqrt(variance);
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return result;
}

double cohens_d(const std::vector<double>& sample_a, const std::vector<double>& sample_b) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "Cohen's d needs at least two values per sample");
  }
  const double na = static_cast<double>(sample_a.size());
  const double nb = static_cast<double>(sample_b.size());
  const double pooled =
      std::sqrt(((na - 1.0) * sample_variance(sample_a) + (nb - 1.0) * sample_variance(sample_b)) / (na + nb - 2.0));
  if (pooled == 0.0) throw Error(ErrorCode::ZeroVariance, "pooled standard deviation is zero");
  return (mean(sample_a) - mean(sample_b)) / pooled;
}

Json to_json(const SetLevelScores& s) {
  Json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  j["true_positives"] = s.true_positives;
  j["false_positives"] = s.false_positives;
  j["false_negatives"] = s.false_negatives;
  return j;
}

namespace {

Json values_json(const MetricValues& values, const std::vector<std::string>& order) {
  Json j;
  for (const auto& name : order) {
    if (auto it = values.find(name); it != values.end()) j[name] = it->second;
  }
  return j;
}

SetLevelScores set_level_from_json(const Json& j) {
  SetLevelScores s;
  s.precision = j.at("precision").get<double>();
  s.recall = j.at("recall").get<double>();
  s.f1 = j.at("f1").get<double>();
  s.true_positives = j.value("true_positives", std::size_t{0});
  s.false_positives = j.value("false_positives", std::size_t{0});
  s.false_negatives = j.value("false_negatives", std::size_t{0});
  return s;
}

}  // namespace

Json to_json(const MetricsReport& report) {
  const auto order = metric_names(report.ks);
  Json j;
  j["ks"] = report.ks;
  Json projects = Json::object();
  for (const auto& [name, pm] : report.per_project) {
    Json p = values_json(pm.values, order);
    p["n_queries"] = pm.n_queries;
    if (pm.set_level) p["set_level"] = to_json(*pm.set_level);
    projects[name] = std::move(p);
  }
  j["per_project"] = std::move(projects);
  j["cross_project_average"] = values_json(report.cross_project_average, order);
  if (report.set_level) j["set_level"] = to_json(*report.set_level);
  return j;
}

MetricsReport metrics_report_from_json(const Json& j) {
  MetricsReport report;
  try {
    report.ks = j.at("ks").get<std::vector<std::size_t>>();
    const auto order = metric_names(report.ks);
    for (const auto& [name, p] : j.at("per_project").items()) {
      ProjectMetrics pm;
      for (const auto& metric : order) pm.values[metric] = p.at(metric).get<double>();
      pm.n_queries = p.at("n_queries").get<std::size_t>();
      if (p.contains("set_level")) pm.set_level = set_level_from_json(p["set_level"]);
      report.per_project.emplace(name, std::move(pm));
    }
    for (const auto& metric : order) {
      report.cross_project_average[metric] = j.at("cross_project_average").at(metric).get<double>();
    }
    if (j.contains("set_level")) report.set_level = set_level_from_json(j["set_level"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("metrics report: ") + e.what());
  }
  return report;
}

std::string format_metrics_table(const std::vector<std::pair<std::string, MetricValues>>& systems,
                                 const std::vector<std::string>& metrics) {
  std::size_t label_width = std::string("Metric").size();
  for (const auto& m : metrics) label_width = std::max(label_width, m.size());
  std::vector<std::size_t> widths;
  for (const auto& [name, values] : systems) {
    std::size_t w = name.size();
    for (const auto& m : metrics) {
      if (auto it = values.find(m); it != values.end()) w = std::max(w, percent(it->second).size());
    }
    widths.push_back(w);
  }
  auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w - s.size(), ' ') + s; };

  std::string out = pad_right("Metric", label_width);
  for (std::size_t c = 0; c < systems.size(); ++c) out += "  " + pad_left(systems[c].first, widths[c]);
  out += '\n';
  std::size_t rule = label_width;
  for (auto w : widths) rule += 2 + w;
  out += std::string(rule, '-') + '\n';
  for (const auto& m : metrics) {
    out += pad_right(m, label_width);
    for (std::size_t c = 0; c < systems.size(); ++c) {
      auto it = systems[c].second.find(m);
      out += "  " + pad_left(it == systems[c].second.end() ? "-" : percent(it->second), widths[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace linkrec
