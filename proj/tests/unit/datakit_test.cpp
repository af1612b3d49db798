#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "tweetnews/datakit/batch.hpp"
#include "tweetnews/datakit/kmeans.hpp"
#include "tweetnews/datakit/tfidf.hpp"
#include "tweetnews/datakit/toy_corpus.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/numerics/rng.hpp"

using namespace tweetnews;
using namespace tweetnews::datakit;

namespace {

double weight(const TfidfModel& m, const SparseVector& v, const std::string& term) {
  const auto idx = m.terms().at(term);
  for (auto [i, w] : v) {
    if (i == idx) return w;
  }
  return 0.0;
}

double norm(const SparseVector& v) {
  double s = 0.0;
  for (auto [i, w] : v) s += w * w;
  return std::sqrt(s);
}

// Adjusted Rand index from the contingency table.
double adjusted_rand(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::pair<std::size_t, std::size_t>, double> nij;
  std::map<std::size_t, double> ai, bj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    nij[{a[i], b[i]}] += 1;
    ai[a[i]] += 1;
    bj[b[i]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double sum_ij = 0, sum_a = 0, sum_b = 0;
  for (auto& [k, v] : nij) sum_ij += c2(v);
  for (auto& [k, v] : ai) sum_a += c2(v);
  for (auto& [k, v] : bj) sum_b += c2(v);
  const double expected = sum_a * sum_b / c2(static_cast<double>(a.size()));
  return (sum_ij - expected) / (0.5 * (sum_a + sum_b) - expected);
}

struct Blobs {
  std::vector<Point> points;
  std::vector<std::size_t> truth;
  std::vector<Point> means;
};

Blobs make_blobs(std::uint64_t seed) {
  Blobs b;
  b.means = {{10, 10}, {-10, 10}, {10, -10}, {-10, -10}};
  Rng rng(seed);
  for (std::size_t c = 0; c < 4; ++c) {
    for (int i = 0; i < 25; ++i) {
      b.points.push_back({b.means[c][0] + 0.5 * rng.normal(), b.means[c][1] + 0.5 * rng.normal()});
      b.truth.push_back(c);
    }
  }
  return b;
}

}  // namespace

TEST_CASE("tfidf tokens strip punctuation and lowercase") {
  CHECK(tfidf_tokens("Breaking: #Quake hits, 12 DEAD!! -") ==
        std::vector<std::string>{"breaking", "quake", "hits", "12", "dead"});
}

TEST_CASE("tfidf weights on a three document corpus") {
  // Frozen from an independent script: idf = 1 + ln(N / (1 + df)).
  const auto m = TfidfModel::fit({"a b", "a c c", "b d"});
  CHECK(m.num_documents() == 3);
  CHECK(m.idf("a") == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.idf("c") == doctest::Approx(1.4054651081081644).epsilon(1e-15));
  auto v0 = m.transform("a b");
  CHECK(weight(m, v0, "a") == doctest::Approx(0.7071067811865475).epsilon(1e-14));
  auto v1 = m.transform("a c c");
  CHECK(weight(m, v1, "a") == doctest::Approx(0.33517574332792605).epsilon(1e-14));
  CHECK(weight(m, v1, "c") == doctest::Approx(0.9421556246632359).epsilon(1e-14));
  auto v2 = m.transform("b d");
  CHECK(weight(m, v2, "b") == doctest::Approx(0.5797386715376657).epsilon(1e-14));
  CHECK(weight(m, v2, "d") == doctest::Approx(0.8148024746671689).epsilon(1e-14));
  CHECK_THROWS_AS(m.idf("zzz"), ConfigError);
}

TEST_CASE("tfidf single document and shared terms") {
  const auto m = TfidfModel::fit({"x y z"});
  CHECK(m.idf("x") == m.idf("y"));
  CHECK(m.idf("x") > 0.0);
  CHECK(norm(m.transform("x y z")) == doctest::Approx(1.0));

  const auto m2 = TfidfModel::fit({"the cat", "the dog", "the bird"});
  CHECK(m2.idf("the") < m2.idf("cat"));
  CHECK(m2.idf("the") >= 0.0);
  CHECK(m2.transform("unseen words only").empty());
  CHECK(m2.transform("the cat") == m2.transform("the cat"));
}

TEST_CASE("cosine properties") {
  const auto m = TfidfModel::fit({"flood in assam", "cup final tonight", "flood relief"});
  const auto a = m.transform("flood in assam");
  const auto b = m.transform("cup final tonight");
  const auto c = m.transform("flood relief");
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, c) == doctest::Approx(cosine(c, a)));
  CHECK(cosine(a, {}) == 0.0);
}

TEST_CASE("similarity filter") {
  const std::vector<std::string> refs{"omg flood in assam 12 dead", "earthquake hits nepal"};
  const std::vector<std::string> cands{"a flood in assam killed 12 people .", "the striker scored twice .",
                                       "an earthquake struck nepal ."};
  CHECK(filter_by_similarity(cands, refs, 0.0).size() == 3);
  const auto kept = filter_by_similarity(cands, refs, 0.2);
  CHECK(kept == std::vector<std::size_t>{0, 2});
  // Monotone in the threshold.
  std::size_t prev = cands.size();
  for (double t = 0.0; t <= 1.0; t += 0.1) {
    const auto k = filter_by_similarity(cands, refs, t).size();
    CHECK(k <= prev);
    prev = k;
  }
}

TEST_CASE("keyword filter") {
  const std::vector<std::string> docs{"Flood waters rise.", "market rallies", "3 killed in blast"};
  CHECK(keyword_filter(docs, default_disaster_keywords()) == std::vector<std::size_t>{0, 2});
  CHECK(keyword_filter(docs, {"MARKET"}) == std::vector<std::size_t>{1});
}

TEST_CASE("kmeans recovers four blobs") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto b = make_blobs(100 + seed);
    const auto r = kmeans(b.points, 4, seed);
    CHECK(r.converged);
    CHECK(adjusted_rand(r.assignment, b.truth) == doctest::Approx(1.0));
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i) {
      CHECK(r.inertia_history[i] <= r.inertia_history[i - 1] + 1e-12);
    }
    for (std::size_t i = 0; i < b.points.size(); ++i) {
      for (std::size_t c = 0; c < 4; ++c) {
        CHECK(squared_distance(b.points[i], r.centroids[r.assignment[i]]) <= squared_distance(b.points[i], r.centroids[c]));
      }
    }
    // Representative is among the three points nearest its true blob mean.
    const auto reps = select_representatives(r, b.points);
    for (std::size_t c = 0; c < 4; ++c) {
      REQUIRE(reps[c].has_value());
      const auto blob = b.truth[*reps[c]];
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < b.points.size(); ++i) {
        if (b.truth[i] == blob) members.push_back(i);
      }
      std::sort(members.begin(), members.end(), [&](auto x, auto y) {
        return squared_distance(b.points[x], b.means[blob]) < squared_distance(b.points[y], b.means[blob]);
      });
      CHECK(std::find(members.begin(), members.begin() + 3, *reps[c]) != members.begin() + 3);
    }
  }
}

TEST_CASE("kmeans is deterministic per seed") {
  const auto b = make_blobs(7);
  const auto r1 = kmeans(b.points, 4, 9);
  const auto r2 = kmeans(b.points, 4, 9);
  CHECK(r1.assignment == r2.assignment);
  CHECK(r1.centroids == r2.centroids);
  CHECK(r1.inertia_history == r2.inertia_history);
}

TEST_CASE("kmeans edge cases") {
  const std::vector<Point> pts{{0, 0}, {1, 0}, {5, 5}};
  const auto r = kmeans(pts, 3, 1);
  CHECK(r.inertia == 0.0);
  std::set<std::size_t> used(r.assignment.begin(), r.assignment.end());
  CHECK(used.size() == 3);
  const auto reps = select_representatives(r, pts);
  for (std::size_t c = 0; c < 3; ++c) CHECK(r.assignment[*reps[c]] == c);

  CHECK_THROWS_AS(kmeans(pts, 4, 1), ConfigError);
  CHECK_THROWS_AS(kmeans(pts, 0, 1), ConfigError);
  CHECK_THROWS_AS(kmeans({{0, 0}, {1}}, 1, 1), ShapeError);

  // Duplicates: seeding still picks distinct indices.
  const auto d = kmeans({{1, 1}, {1, 1}, {1, 1}}, 2, 3);
  CHECK(d.inertia == 0.0);
}

TEST_CASE("representative ties go to the lowest index") {
  KmeansResult r;
  r.centroids = {{0.0}};
  r.assignment = {0, 0, 0};
  const std::vector<Point> pts{{2.0}, {1.0}, {-1.0}};
  CHECK(select_representatives(r, pts)[0] == std::optional<std::size_t>(1));
  CHECK(representative_texts(r, pts, {"a", "b", "c"}) == std::vector<std::string>{"b"});
  r.centroids.push_back({100.0});
  CHECK_FALSE(select_representatives(r, pts)[1].has_value());
}

TEST_CASE("streams and batches") {
  std::vector<TokenId> toks(512);
  std::iota(toks.begin(), toks.end(), 10);
  CHECK(make_streams(toks, 256).size() == 2);
  toks.push_back(7);
  CHECK(make_streams(toks, 256).size() == 2);

  auto b = pad_batch({{5, 6, 7}, {5, 6, 7, 8, 9}}, Style::kL2);
  CHECK(b.seq_len == 5);
  const auto mask = b.mask();
  CHECK(std::accumulate(mask.begin(), mask.begin() + 5, 0) == 3);
  CHECK(std::accumulate(mask.begin() + 5, mask.end(), 0) == 5);
  CHECK(b.at(0, 4) == tokenizer::kPad);
}

TEST_CASE("toy corpus is deterministic and domain-separable") {
  const auto c1 = generate_toy_corpus({}, 5);
  const auto c2 = generate_toy_corpus({}, 5);
  CHECK(c1.tweets == c2.tweets);
  CHECK(c1.news == c2.news);
  CHECK(c1.tweets.size() == 500);
  CHECK(c1.parallel.size() == 50);
  CHECK(c1.tweet_groups.size() == 4);
  for (const auto& g : c1.tweet_groups) CHECK(g.size() == 4);
  CHECK(keyword_filter(c1.off_domain, default_disaster_keywords()).empty());
  const auto kept = filter_by_similarity(c1.off_domain, c1.tweets, 0.2);
  CHECK(kept.size() < c1.off_domain.size() / 4);
}
