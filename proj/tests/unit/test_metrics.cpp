#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "linkrec/error.hpp"
#include "linkrec/metrics.hpp"
#include "oracles/metrics_oracle.hpp"
#include "oracles/stats_oracle.hpp"

using namespace linkrec;

namespace {

// ranking "c1".."cN"; relevant ids given by 1-based rank (rank > n means not ranked)
QueryJudgment judgment(std::size_t n, std::vector<std::size_t> relevant_ranks) {
  QueryJudgment j;
  j.issue_id = "I";
  for (std::size_t i = 1; i <= n; ++i) j.ranking.push_back("c" + std::to_string(i));
  for (auto r : relevant_ranks) j.relevant.insert("c" + std::to_string(r));
  return j;
}

}  // namespace

TEST(Precision, Examples) {
  EXPECT_DOUBLE_EQ(precision_at_k(judgment(20, {1}), 1), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_k(judgment(20, {1}), 10), 0.1);
  EXPECT_DOUBLE_EQ(precision_at_k(judgment(20, {2, 9}), 10), 0.2);
}

TEST(Hit, Examples) {
  EXPECT_EQ(hit_at_k(judgment(20, {1}), 1), 1.0);
  EXPECT_EQ(hit_at_k(judgment(20, {11}), 10), 0.0);
  EXPECT_EQ(hit_at_k(judgment(20, {4, 12}), 10), 1.0);
}

TEST(Recall, Examples) {
  EXPECT_DOUBLE_EQ(recall_at_k(judgment(20, {3}), 10), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(judgment(20, {3, 15}), 10), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(judgment(20, {1, 5, 19}), 10), 2.0 / 3.0);
}

TEST(ReciprocalRank, Examples) {
  EXPECT_DOUBLE_EQ(reciprocal_rank(judgment(20, {1})), 1.0);
  EXPECT_DOUBLE_EQ(reciprocal_rank(judgment(20, {4})), 0.25);
  auto a = judgment(5, {1});
  auto b = judgment(5, {2});
  b.issue_id = "J";
  const auto m = evaluate_queries({a, b}, {1, 10});
  EXPECT_DOUBLE_EQ(m.at("MRR"), 0.75);
}

TEST(ReciprocalRank, MissingRelevantCountsAsZero) {
  auto j = judgment(5, {});
  j.relevant.insert("elsewhere");
  EXPECT_EQ(reciprocal_rank(j), 0.0);
  EXPECT_EQ(hit_at_k(j, 10), 0.0);
  EXPECT_EQ(ndcg_at_k(j, 10), 0.0);
  EXPECT_FALSE(j.first_relevant_rank());
}

TEST(Ndcg, Examples) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(judgment(20, {1}), 1), 1.0);
  EXPECT_NEAR(ndcg_at_k(judgment(20, {3}), 10), 0.5, 1e-15);
  EXPECT_NEAR(ndcg_at_k(judgment(20, {1, 2}), 10), 1.0, 1e-15);
}

TEST(MetricProperties, RandomJudgmentsMatchOracle) {
  std::mt19937_64 gen(7);
  for (int q = 0; q < 300; ++q) {
    const std::size_t n = 1 + gen() % 40;
    QueryJudgment j;
    oracle::Judgment o;
    for (std::size_t i = 0; i < n; ++i) j.ranking.push_back("c" + std::to_string(i));
    const std::size_t n_rel = 1 + gen() % 4;
    for (std::size_t r = 0; r < n_rel; ++r) j.relevant.insert("c" + std::to_string(gen() % (n + 5)));
    o.ranking = j.ranking;
    o.relevant = j.relevant;
    for (std::size_t k : {1u, 3u, 5u, 10u, 20u}) {
      EXPECT_NEAR(precision_at_k(j, k), oracle::precision(o, k), 1e-12);
      EXPECT_NEAR(hit_at_k(j, k), oracle::hit(o, k), 1e-12);
      EXPECT_NEAR(recall_at_k(j, k), oracle::recall(o, k), 1e-12);
      EXPECT_NEAR(ndcg_at_k(j, k), oracle::ndcg(o, k), 1e-12);
      const double nd = ndcg_at_k(j, k);
      EXPECT_GE(nd, 0.0);
      EXPECT_LE(nd, 1.0);
    }
    EXPECT_NEAR(reciprocal_rank(j), oracle::rr(o), 1e-12);
    EXPECT_EQ(hit_at_k(j, 1), precision_at_k(j, 1));
    for (std::size_t k = 1; k < 30; ++k) {
      EXPECT_LE(hit_at_k(j, k), hit_at_k(j, k + 1));
      EXPECT_LE(recall_at_k(j, k), recall_at_k(j, k + 1));
    }
  }
}

TEST(MetricProperties, ReorderingWithinTopTenKeepsSetMetrics) {
  auto j = judgment(30, {2, 7, 14});
  const double p = precision_at_k(j, 10), h = hit_at_k(j, 10), r = recall_at_k(j, 10);
  std::reverse(j.ranking.begin(), j.ranking.begin() + 10);
  EXPECT_EQ(precision_at_k(j, 10), p);
  EXPECT_EQ(hit_at_k(j, 10), h);
  EXPECT_EQ(recall_at_k(j, 10), r);
}

TEST(MetricProperties, PermutingIrrelevantTailChangesNothing) {
  auto j = judgment(30, {2, 7});
  const auto before = evaluate_queries({j}, {1, 5, 10, 20});
  std::reverse(j.ranking.begin() + 7, j.ranking.end());
  EXPECT_EQ(evaluate_queries({j}, {1, 5, 10, 20}), before);
}

TEST(Aggregate, SingleQueryAllOne) {
  const auto report = aggregate({{"p", {judgment(5, {1})}}});
  EXPECT_EQ(report.cross_project_average.at("P@1"), 1.0);
  EXPECT_EQ(report.cross_project_average.at("MRR"), 1.0);
  EXPECT_EQ(report.cross_project_average.at("NDCG@1"), 1.0);
}

TEST(Aggregate, MacroOverProjects) {
  std::vector<QueryJudgment> many;
  for (int i = 0; i < 9; ++i) {
    auto j = judgment(5, {2});
    j.issue_id = "Q" + std::to_string(i);
    many.push_back(j);
  }
  const auto report = aggregate({{"a", {judgment(5, {1})}}, {"b", many}});
  EXPECT_DOUBLE_EQ(report.cross_project_average.at("P@1"), 0.5);
}

TEST(Aggregate, ThreeProjectsMatchOracle) {
  std::mt19937_64 gen(99);
  std::map<std::string, std::vector<QueryJudgment>> projects;
  std::map<std::string, std::vector<oracle::Judgment>> mirror;
  for (const char* name : {"alpha", "beta", "gamma"}) {
    for (int q = 0; q < 5; ++q) {
      auto j = judgment(15, {1 + gen() % 18, 1 + gen() % 18});
      j.issue_id = std::string(name) + std::to_string(q);
      projects[name].push_back(j);
      mirror[name].push_back({j.ranking, j.relevant});
    }
  }
  const auto report = aggregate(projects, {1, 10});
  double p1 = 0, mrr = 0, nd10 = 0;
  for (const auto& [name, js] : mirror) {
    double sp = 0, sm = 0, sn = 0;
    for (const auto& j : js) {
      sp += oracle::precision(j, 1);
      sm += oracle::rr(j);
      sn += oracle::ndcg(j, 10);
    }
    p1 += sp / 5.0;
    mrr += sm / 5.0;
    nd10 += sn / 5.0;
  }
  EXPECT_NEAR(report.cross_project_average.at("P@1"), p1 / 3.0, 1e-12);
  EXPECT_NEAR(report.cross_project_average.at("MRR"), mrr / 3.0, 1e-12);
  EXPECT_NEAR(report.cross_project_average.at("NDCG@10"), nd10 / 3.0, 1e-12);
  EXPECT_EQ(report.per_project.size(), 3u);
}

TEST(Aggregate, EmptyProjectThrows) {
  try {
    aggregate({{"p", {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyProject);
  }
}

TEST(Aggregate, MetricNamesAndJsonRoundTrip) {
  EXPECT_EQ(metric_names({1, 10}),
            (std::vector<std::string>{"P@1", "P@10", "Hit@1", "Hit@10", "Recall@1", "Recall@10", "MRR", "NDCG@1",
                                      "NDCG@10"}));
  const auto report = aggregate({{"p", {judgment(5, {1, 3})}}});
  const auto back = metrics_report_from_json(to_json(report));
  EXPECT_EQ(back.cross_project_average, report.cross_project_average);
  EXPECT_EQ(back.ks, report.ks);
}

TEST(CombineProjects, MatchesJointAggregate) {
  auto a = judgment(5, {1});
  auto b = judgment(5, {3});
  const auto joint = aggregate({{"x", {a}}, {"y", {b}}});
  const auto merged = combine_projects({aggregate({{"x", {a}}}), aggregate({{"y", {b}}})});
  for (const auto& [name, v] : joint.cross_project_average) {
    EXPECT_NEAR(merged.cross_project_average.at(name), v, 1e-15);
  }
  EXPECT_THROW(combine_projects({aggregate({{"x", {a}}}), aggregate({{"x", {b}}})}), Error);
}

TEST(SetLevel, Examples) {
  auto all = set_level_prf({{"i1", "a"}, {"i2", "b"}}, {{"i1", {"a"}}, {"i2", {"b"}}});
  EXPECT_EQ(all.precision, 1.0);
  EXPECT_EQ(all.recall, 1.0);
  EXPECT_EQ(all.f1, 1.0);

  auto multi = set_level_prf({{"i1", "a"}}, {{"i1", {"a", "b"}}});
  EXPECT_EQ(multi.true_positives, 1u);
  EXPECT_EQ(multi.false_negatives, 1u);
  EXPECT_EQ(multi.false_positives, 0u);

  auto none = set_level_prf({{"i1", "x"}, {"i2", "y"}}, {{"i1", {"a"}}, {"i2", {"b"}}});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

TEST(MannWhitney, SeparatedSamplesExact) {
  const auto r = mann_whitney_u({1, 2, 3}, {10, 11, 12});
  EXPECT_EQ(r.u, 0.0);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p_value, oracle::exact_p({1, 2, 3}, {10, 11, 12}), 1e-12);
  EXPECT_NEAR(r.p_value, 0.1, 1e-12);  // 2 extreme splits of C(6,3) = 20
}

TEST(MannWhitney, IdenticalSamplesAndSymmetry) {
  EXPECT_NEAR(mann_whitney_u({1, 2, 3}, {1, 2, 3}).p_value, 1.0, 1e-12);
  const std::vector<double> a = {0.3, 1.2, 2.2, 5.0, 0.1}, b = {0.9, 4.0, 4.4, 7.1};
  EXPECT_NEAR(mann_whitney_u(a, b).p_value, mann_whitney_u(b, a).p_value, 1e-12);
  EXPECT_THROW(mann_whitney_u({2, 2}, {2, 2, 2}), Error);
  EXPECT_THROW(mann_whitney_u({}, {1}), Error);
}

TEST(MannWhitney, SmallSamplesMatchEnumeration) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 40; ++t) {
    std::vector<double> a(1 + gen() % 6), b(1 + gen() % 6);
    for (auto& x : a) x = static_cast<double>(gen() % 6);
    for (auto& x : b) x = static_cast<double>(gen() % 6);
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    if (std::all_of(all.begin(), all.end(), [&](double x) { return x == all[0]; })) continue;
    const auto r = mann_whitney_u(a, b);
    EXPECT_EQ(r.u, oracle::u_by_pairs(a, b));
    EXPECT_NEAR(r.p_value, oracle::exact_p(a, b), 1e-12);
  }
}

TEST(MannWhitney, LargeSamplesUseNormalApproximation) {
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(i);
    b.push_back(i + 10.5);
  }
  const auto r = mann_whitney_u(a, b);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.u, oracle::u_by_pairs(a, b));
  EXPECT_GT(r.p_value, 0.0);
  EXPECT_LT(r.p_value, 0.01);
}

TEST(CohensD, Examples) {
  EXPECT_NEAR(cohens_d({2, 4}, {0, 2}), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cohens_d({2, 4}, {0, 2}), 1.414, 1e-3);
  EXPECT_EQ(cohens_d({1, 2, 3}, {3, 2, 1}), 0.0);
  EXPECT_NEAR(cohens_d({-2, -4}, {0, -2}), -cohens_d({2, 4}, {0, 2}), 1e-15);
  EXPECT_NEAR(cohens_d({1, 5, 2, 8}, {3, 3.5, 1}), oracle::cohens_d({1, 5, 2, 8}, {3, 3.5, 1}), 1e-12);
  EXPECT_THROW(cohens_d({1, 1}, {1, 1}), Error);
  EXPECT_THROW(cohens_d({1}, {1, 2}), Error);
}

TEST(Table, FormatsPercentages) {
  const auto text = format_metrics_table({{"sys", {{"P@1", 0.75}}}}, {"P@1"});
  EXPECT_NE(text.find("75.00"), std::string::npos);
}
