#include "linkrec/ranking.hpp"

#include "linkrec/error.hpp"

namespace linkrec {

std::string to_string(RankingStage stage) {
  switch (stage) {
    case RankingStage::RETRIEVAL: return "RETRIEVAL";
    case RankingStage::VSM: return "VSM";
    case RankingStage::RERANKED: return "RERANKED";
  }
  return "RETRIEVAL";
}

RankingStage ranking_stage_from_string(const std::string& text) {
  if (text == "RETRIEVAL") return RankingStage::RETRIEVAL;
  if (text == "VSM") return RankingStage::VSM;
  if (text == "RERANKED") return RankingStage::RERANKED;
  throw Error(ErrorCode::ParseError, "unknown ranking stage '" + text + "'");
}

std::vector<std::string> RankedList::commit_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ranking.size());
  for (const auto& entry : ranking) ids.push_back(entry.commit_id);
  return ids;
}

Json to_json(const RankedList& list) {
  Json j;
  j["issue_id"] = list.issue_id;
  j["ranking"] = list.commit_ids();
  Json scores = Json::array();
  for (const auto& entry : list.ranking) scores.push_back(entry.score);
  j["scores"] = std::move(scores);
  j["stage"] = to_string(list.stage);
  return j;
}

RankedList ranked_list_from_json(const Json& j) {
  RankedList list;
  try {
    list.issue_id = j.at("issue_id").is_string() ? j.at("issue_id").get<std::string>()
                                                  : std::to_string(j.at("issue_id").get<long long>());
    const auto ids = j.at("ranking").get<std::vector<std::string>>();
    std::vector<double> scores;
    if (auto it = j.find("scores"); it != j.end()) scores = it->get<std::vector<double>>();
    if (!scores.empty() && scores.size() != ids.size()) {
      throw Error(ErrorCode::ParseError, "scores/ranking length mismatch for " + list.issue_id);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      list.ranking.push_back({ids[i], scores.empty() ? 0.0 : scores[i]});
    }
    list.stage = ranking_stage_from_string(j.value("stage", std::string("RETRIEVAL")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("ranking row: ") + e.what());
  }
  return list;
}

void write_rankings(const std::string& path, const std::vector<RankedList>& lists) {
  std::vector<Json> rows;
  rows.reserve(lists.size());
  for (const auto& list : lists) rows.push_back(to_json(list));
  write_jsonl(path, rows);
}

std::vector<RankedList> read_rankings(const std::string& path) {
  std::vector<RankedList> lists;
  for (const auto& row : read_jsonl(path)) lists.push_back(ranked_list_from_json(row));
  return lists;
}

}  // namespace linkrec
