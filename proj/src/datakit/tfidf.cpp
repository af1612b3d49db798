#include "tweetnews/datakit/tfidf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "tweetnews/error.hpp"

namespace tweetnews::datakit {

std::vector<std::string> tfidf_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) {
    std::string t;
    for (char c : w) {
      if (std::isalnum(static_cast<unsigned char>(c))) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

TfidfModel TfidfModel::fit(const std::vector<std::string>& corpus) {
  TfidfModel m;
  m.n_docs_ = corpus.size();
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto toks = tfidf_tokens(doc);
    for (const auto& t : std::set<std::string>(toks.begin(), toks.end())) ++df[t];
  }
  for (const auto& [term, count] : df) {
    m.index_[term] = m.idf_.size();
    m.idf_.push_back(1.0 + std::log(static_cast<double>(m.n_docs_) / (1.0 + static_cast<double>(count))));
  }
  return m;
}

SparseVector TfidfModel::transform(const std::string& doc) const {
  std::map<std::size_t, double> counts;
  for (const auto& t : tfidf_tokens(doc)) {
    if (auto it = index_.find(t); it != index_.end()) counts[it->second] += 1.0;
  }
  SparseVector v;
  double norm = 0.0;
  for (auto [i, c] : counts) {
    const double w = c * idf_[i];
    v.emplace_back(i, w);
    norm += w * w;
  }
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (auto& e : v) e.second /= norm;
  }
  return v;
}

std::vector<double> TfidfModel::transform_dense(const std::string& doc) const {
  std::vector<double> out(idf_.size(), 0.0);
  for (auto [i, w] : transform(doc)) out[i] = w;
  return out;
}

double TfidfModel::idf(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) throw ConfigError("term '" + term + "' not in tf-idf vocabulary");
  return idf_[it->second];
}

double cosine(const SparseVector& u, const SparseVector& v) {
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < u.size() && j < v.size()) {
    if (u[i].first == v[j].first) {
      dot += u[i++].second * v[j++].second;
    } else if (u[i].first < v[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return std::clamp(dot, -1.0, 1.0);
}

std::vector<std::size_t> filter_by_similarity(const std::vector<std::string>& candidates,
                                              const std::vector<std::string>& references, double threshold) {
  std::vector<std::string> all = candidates;
  all.insert(all.end(), references.begin(), references.end());
  const auto model = TfidfModel::fit(all);
  std::vector<SparseVector> refs;
  for (const auto& r : references) refs.push_back(model.transform(r));
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto v = model.transform(candidates[i]);
    double best = refs.empty() ? 0.0 : -1.0;
    for (const auto& r : refs) best = std::max(best, cosine(v, r));
    if (best >= threshold) kept.push_back(i);
  }
  return kept;
}

std::vector<std::size_t> keyword_filter(const std::vector<std::string>& docs, const std::vector<std::string>& keywords) {
  std::set<std::string> keys;
  for (const auto& k : keywords) {
    for (auto& t : tfidf_tokens(k)) keys.insert(std::move(t));
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& t : tfidf_tokens(docs[i])) {
      if (keys.count(t)) {
        kept.push_back(i);
        break;
      }
    }
  }
  return kept;
}

std::vector<std::string> default_disaster_keywords() {
  return {"earthquake", "quake",  "flood",    "floods",    "flooding", "cyclone",  "hurricane", "storm",
          "tsunami",    "fire",   "wildfire", "landslide", "killed",   "dead",     "injured",   "rescue",
          "evacuated",  "relief", "disaster", "victims",   "attack",   "collapsed", "tornado",  "blast"};
}

}  // namespace tweetnews::datakit
