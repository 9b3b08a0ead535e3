#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linkrec/ranking.hpp"

namespace linkrec {

// Lowercases ASCII, splits on anything that is not an ASCII letter or digit
// (bytes >= 0x80 are kept as word characters) and drops tokens shorter than
// two bytes. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view text);

using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by column

// TF-IDF with raw term counts and idf(t) = ln(N / df(t)), no smoothing.
class TfidfModel {
 public:
  // documents: (commit_id, text). Throws EmptyCorpus, InvalidArgument on
  // duplicate ids.
  static TfidfModel build(const std::vector<std::pair<std::string, std::string>>& documents);

  std::size_t document_count() const { return doc_ids_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  // Column of `token`, or npos for out-of-vocabulary tokens.
  std::size_t column(const std::string& token) const;
  double idf(const std::string& token) const;
  const SparseVector& document_vector(const std::string& commit_id) const;

  // TF-IDF vector of arbitrary text; out-of-vocabulary tokens are ignored.
  SparseVector vectorize(std::string_view text) const;

  Json to_json() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::string> vocabulary_;  // lexicographically sorted
  std::vector<double> idf_;
  std::vector<std::string> doc_ids_;
  std::map<std::string, SparseVector> doc_vectors_;
};

double sparse_cosine(const SparseVector& a, const SparseVector& b);

// Candidates ordered by TF-IDF cosine with the issue text, ties by ascending
// commit id. Throws EmptyCandidates, InvalidArgument for ids outside the model.
RankedList rank_vsm(const TfidfModel& model, std::string_view issue_text,
                    const std::vector<std::string>& candidate_ids);

}  // namespace linkrec
