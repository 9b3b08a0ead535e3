#include "linkrec/vsm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "linkrec/error.hpp"

namespace linkrec {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

std::map<std::string, std::size_t> term_counts(std::string_view text) {
  std::map<std::string, std::size_t> counts;
  for (auto& t : tokenize(text)) ++counts[std::move(t)];
  return counts;
}

double sparse_norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [_, w] : v) s += w * w;
  return std::sqrt(s);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 2) tokens.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TfidfModel TfidfModel::build(const std::vector<std::pair<std::string, std::string>>& documents) {
  if (documents.empty()) throw Error(ErrorCode::EmptyCorpus, "TF-IDF model needs at least one document");
  TfidfModel model;
  std::vector<std::map<std::string, std::size_t>> counts;
  std::map<std::string, std::size_t> df;
  std::set<std::string> seen_ids;
  for (const auto& [id, text] : documents) {
    if (!seen_ids.insert(id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate document id " + id);
    }
    model.doc_ids_.push_back(id);
    counts.push_back(term_counts(text));
    for (const auto& [term, _] : counts.back()) ++df[term];
  }
  const double n = static_cast<double>(documents.size());
  for (const auto& [term, d] : df) {  // std::map iterates in sorted order
    model.vocabulary_.push_back(term);
    model.idf_.push_back(std::log(n / static_cast<double>(d)));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    SparseVector v;
    for (const auto& [term, tf] : counts[i]) {
      const auto col = model.column(term);
      v.emplace_back(col, static_cast<double>(tf) * model.idf_[col]);
    }
    model.doc_vectors_.emplace(model.doc_ids_[i], std::move(v));
  }
  return model;
}

std::size_t TfidfModel::column(const std::string& token) const {
  auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), token);
  if (it == vocabulary_.end() || *it != token) return npos;
  return static_cast<std::size_t>(it - vocabulary_.begin());
}

double TfidfModel::idf(const std::string& token) const {
  const auto col = column(token);
  return col == npos ? 0.0 : idf_[col];
}

const SparseVector& TfidfModel::document_vector(const std::string& commit_id) const {
  auto it = doc_vectors_.find(commit_id);
  if (it == doc_vectors_.end()) {
    throw Error(ErrorCode::InvalidArgument, "document " + commit_id + " is not in the model");
  }
  return it->second;
}

SparseVector TfidfModel::vectorize(std::string_view text) const {
  SparseVector v;
  for (const auto& [term, tf] : term_counts(text)) {
    const auto col = column(term);
    if (col != npos) v.emplace_back(col, static_cast<double>(tf) * idf_[col]);
  }
  return v;
}

Json TfidfModel::to_json() const {
  Json j;
  j["vocabulary"] = vocabulary_;
  j["idf"] = idf_;
  Json docs = Json::object();
  for (const auto& id : doc_ids_) {
    Json entries = Json::array();
    for (const auto& [col, w] : doc_vectors_.at(id)) entries.push_back(Json::array({col, w}));
    docs[id] = std::move(entries);
  }
  j["documents"] = std::move(docs);
  return j;
}

double sparse_cosine(const SparseVector& a, const SparseVector& b) {
  const double na = sparse_norm(a);
  const double nb = sparse_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

RankedList rank_vsm(const TfidfModel& model, std::string_view issue_text,
                    const std::vector<std::string>& candidate_ids) {
  if (candidate_ids.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates to rank");
  const auto query = model.vectorize(issue_text);
  RankedList list;
  list.stage = RankingStage::VSM;
  std::set<std::string> seen;
  for (const auto& id : candidate_ids) {
    if (!seen.insert(id).second) continue;
    list.ranking.push_back({id, sparse_cosine(query, model.document_vector(id))});
  }
  std::sort(list.ranking.begin(), list.ranking.end(), ranks_before);
  return list;
}

}  // namespace linkrec
