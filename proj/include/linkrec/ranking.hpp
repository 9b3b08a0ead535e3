#pragma once

#include <string>
#include <utility>
#include <vector>

#include "linkrec/records.hpp"

namespace linkrec {

enum class RankingStage { RETRIEVAL, VSM, RERANKED };

std::string to_string(RankingStage stage);
RankingStage ranking_stage_from_string(const std::string& text);

struct ScoredCommit {
  std::string commit_id;
  double score = 0.0;

  bool operator==(const ScoredCommit&) const = default;
};

struct RankedList {
  std::string issue_id;
  std::vector<ScoredCommit> ranking;
  RankingStage stage = RankingStage::RETRIEVAL;

  std::vector<std::string> commit_ids() const;
  bool operator==(const RankedList&) const = default;
};

// Score-descending, commit-id-ascending order shared by every ranker.
inline bool ranks_before(const ScoredCommit& a, const ScoredCommit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.commit_id < b.commit_id;
}

Json to_json(const RankedList& list);
RankedList ranked_list_from_json(const Json& j);

// One JSON object per line: issue_id, ranking (commit ids), scores, stage.
void write_rankings(const std::string& path, const std::vector<RankedList>& lists);
std::vector<RankedList> read_rankings(const std::string& path);

}  // namespace linkrec
