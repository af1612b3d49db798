#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tweetnews::datakit {

/// Synthetic disaster-domain corpus. Tweets and news sentences describe
/// events drawn from the same slot inventory (kind, place, count, day,
/// agency) but use disjoint surface templates: tweets are lowercase, use
/// abbreviations and hashtags; news sentences are formal and tokenized.
struct ToyCorpus {
  std::vector<std::string> tweets;
  std::vector<std::string> news;
  /// Sports and economy sentences for exercising the domain filters.
  std::vector<std::string> off_domain;
  /// (tweet, news) renderings of the same event, disjoint from the above.
  std::vector<std::pair<std::string, std::string>> parallel;
  /// News sentences with the propositions their template implies.
  std::vector<std::pair<std::string, std::vector<std::string>>> news_clauses;
  /// Groups of four tweets about one event each.
  std::vector<std::vector<std::string>> tweet_groups;
  /// News paragraph for each group: the news renderings of its four tweets.
  std::vector<std::string> group_references;
};

struct ToyCorpusSpec {
  std::size_t tweets = 500;
  std::size_t news = 500;
  std::size_t off_domain = 100;
  std::size_t parallel = 50;
  std::size_t groups = 4;
  std::size_t news_clauses = 300;
};

ToyCorpus generate_toy_corpus(const ToyCorpusSpec& spec, std::uint64_t seed);

}  // namespace tweetnews::datakit
