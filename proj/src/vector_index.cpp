#include "linkrec/vector_index.hpp"

#include <algorithm>
#include <cmath>

#include "linkrec/error.hpp"

namespace linkrec {

namespace {

double norm_of(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  const double na = norm_of(a.data(), a.size());
  const double nb = norm_of(b.data(), b.size());
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return clamp_unit(dot(a.data(), b.data(), a.size()) / (na * nb));
}

VectorIndex::VectorIndex(std::string provider_name, std::size_t dimension)
    : provider_name_(std::move(provider_name)), dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::InvalidArgument, "index dimension must be positive");
}

void VectorIndex::add(const std::string& commit_id, const EmbeddingVector& vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "vector for " + commit_id + " has dimension " +
                                                  std::to_string(vector.size()));
  }
  if (rows_.count(commit_id) != 0) {
    throw Error(ErrorCode::InvalidArgument, "duplicate commit id " + commit_id + " in index");
  }
  for (double x : vector) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite entry for " + commit_id);
  }
  const double n = norm_of(vector.data(), vector.size());
  if (n == 0.0) throw Error(ErrorCode::ZeroVector, "zero embedding for " + commit_id);
  rows_.emplace(commit_id, ids_.size());
  ids_.push_back(commit_id);
  for (double x : vector) data_.push_back(x / n);
}

EmbeddingVector VectorIndex::vector(std::size_t row) const {
  const auto begin = data_.begin() + static_cast<long>(row * dimension_);
  return EmbeddingVector(begin, begin + static_cast<long>(dimension_));
}

std::optional<std::size_t> VectorIndex::row_of(const std::string& commit_id) const {
  auto it = rows_.find(commit_id);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

RankedList VectorIndex::query_top_k(const EmbeddingVector& query, std::size_t k,
                                    const std::set<std::string>* candidate_filter) const {
  if (ids_.empty()) throw Error(ErrorCode::EmptyIndex, "query against an empty index");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (query.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                  " vs index " + std::to_string(dimension_));
  }
  const double qn = norm_of(query.data(), query.size());
  if (qn == 0.0) throw Error(ErrorCode::ZeroVector, "zero query vector");
  EmbeddingVector q(query);
  for (double& x : q) x /= qn;

  std::vector<ScoredCommit> scored;
  auto score_row = [&](std::size_t row) {
    scored.push_back({ids_[row], clamp_unit(dot(q.data(), data_.data() + row * dimension_, dimension_))});
  };
  if (candidate_filter != nullptr) {
    scored.reserve(candidate_filter->size());
    for (const auto& id : *candidate_filter) {
      if (auto row = row_of(id)) score_row(*row);
    }
  } else {
    scored.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) score_row(row);
  }
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(keep), scored.end(), ranks_before);
  scored.resize(keep);
  return RankedList{{}, std::move(scored), RankingStage::RETRIEVAL};
}

Json VectorIndex::to_json() const {
  Json j;
  j["provider"] = provider_name_;
  j["dimension"] = dimension_;
  j["count"] = ids_.size();
  Json entries = Json::array();
  for (std::size_t row = 0; row < ids_.size(); ++row) {
    Json e;
    e["commit_id"] = ids_[row];
    e["vector"] = vector(row);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

VectorIndex VectorIndex::from_json(const Json& j) {
  try {
    VectorIndex index(j.at("provider").get<std::string>(), j.at("dimension").get<std::size_t>());
    const auto& entries = j.at("entries");
    if (entries.size() != j.at("count").get<std::size_t>()) {
      throw Error(ErrorCode::ParseError, "index count does not match entries");
    }
    for (const auto& e : entries) {
      const auto id = e.at("commit_id").get<std::string>();
      const auto v = e.at("vector").get<EmbeddingVector>();
      if (v.size() != index.dimension_) {
        throw Error(ErrorCode::DimensionMismatch, "stored vector for " + id);
      }
      // Stored vectors are already normalized; keep their exact bits.
      index.rows_.emplace(id, index.ids_.size());
      index.ids_.push_back(id);
      index.data_.insert(index.data_.end(), v.begin(), v.end());
    }
    return index;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("index file: ") + e.what());
  }
}

void VectorIndex::save(const std::string& path) const { write_file_atomic(path, dump_json(to_json()) + "\n"); }

VectorIndex VectorIndex::load(const std::string& path) { return from_json(read_json_file(path)); }

VectorIndex build_index(const EmbeddingProvider& provider, const CommitPool& pool) {
  if (pool.commits.empty()) throw Error(ErrorCode::EmptyIndex, "commit pool is empty");
  std::vector<std::string> messages;
  messages.reserve(pool.commits.size());
  for (const auto& c : pool.commits) messages.push_back(c.message);
  const auto vectors = provider.embed_batch(messages);
  if (vectors.size() != messages.size()) {
    throw Error(ErrorCode::ProviderFailure, "provider returned the wrong number of vectors");
  }
  VectorIndex index(provider.name(), provider.dimension());
  for (std::size_t i = 0; i < vectors.size(); ++i) index.add(pool.commits[i].commit_id, vectors[i]);
  return index;
}

}  // namespace linkrec
