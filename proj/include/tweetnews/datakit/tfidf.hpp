#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tweetnews::datakit {

/// Sorted (term index, weight) pairs.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

/// Lowercased whitespace tokens with punctuation removed; empty tokens are
/// dropped. Independent of BPE.
std::vector<std::string> tfidf_tokens(const std::string& text);

/// idf(t) = 1 + ln(N / (1 + df(t))), which stays positive even for terms
/// present in every document.
class TfidfModel {
 public:
  static TfidfModel fit(const std::vector<std::string>& corpus);

  /// Raw term counts times idf, L2-normalised. Unseen terms are ignored; a
  /// document with no known term maps to the empty vector.
  SparseVector transform(const std::string& doc) const;
  std::vector<double> transform_dense(const std::string& doc) const;

  std::size_t num_documents() const { return n_docs_; }
  std::size_t num_terms() const { return idf_.size(); }
  /// Throws ConfigError for unknown terms.
  double idf(const std::string& term) const;
  const std::map<std::string, std::size_t>& terms() const { return index_; }

 private:
  std::size_t n_docs_ = 0;
  std::map<std::string, std::size_t> index_;
  std::vector<double> idf_;
};

/// Dot product of two normalised vectors; 0 when either is empty.
double cosine(const SparseVector& u, const SparseVector& v);

/// Indices of candidates whose best cosine against any reference reaches
/// threshold. The TF-IDF model is fit on candidates and references together.
std::vector<std::size_t> filter_by_similarity(const std::vector<std::string>& candidates,
                                              const std::vector<std::string>& references, double threshold);

/// Stand-in for a learned in-domain classifier: indices of documents that
/// contain at least one keyword (compared after tfidf_tokens normalisation).
std::vector<std::size_t> keyword_filter(const std::vector<std::string>& docs, const std::vector<std::string>& keywords);

/// Disaster vocabulary used when no keyword file is given.
std::vector<std::string> default_disaster_keywords();

}  // namespace tweetnews::datakit
