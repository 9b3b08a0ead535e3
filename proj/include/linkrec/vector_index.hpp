#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "linkrec/embedding.hpp"
#include "linkrec/ranking.hpp"

namespace linkrec {

// a.b / (|a| |b|), clamped to [-1, 1].
// Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Exact (brute-force) cosine index over commit embeddings. Vectors are
// stored L2-normalized, so scoring is a dot product. Immutable once built;
// concurrent queries are safe.
class VectorIndex {
 public:
  VectorIndex(std::string provider_name, std::size_t dimension);

  // Throws DimensionMismatch, ZeroVector, or InvalidArgument on a duplicate id.
  void add(const std::string& commit_id, const EmbeddingVector& vector);

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::string& provider_name() const { return provider_name_; }
  const std::vector<std::string>& ids() const { return ids_; }
  // Stored (normalized) vector of row `row`.
  EmbeddingVector vector(std::size_t row) const;
  std::optional<std::size_t> row_of(const std::string& commit_id) const;

  // Top-k by cosine, ties by ascending commit id. With a filter only those
  // ids are scored (unknown ids are ignored). Throws EmptyIndex.
  RankedList query_top_k(const EmbeddingVector& query, std::size_t k,
                         const std::set<std::string>* candidate_filter = nullptr) const;

  Json to_json() const;
  static VectorIndex from_json(const Json& j);
  void save(const std::string& path) const;
  static VectorIndex load(const std::string& path);

 private:
  std::string provider_name_;
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> rows_;
};

// One entry per commit, embedding the (already scrubbed) message only.
// Throws EmptyIndex for an empty pool.
VectorIndex build_index(const EmbeddingProvider& provider, const CommitPool& pool);

}  // namespace linkrec
