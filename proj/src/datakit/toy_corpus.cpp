#include "tweetnews/datakit/toy_corpus.hpp"

#include <array>

#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::datakit {

namespace {

struct Event {
  std::string kind, place, count, day, agency;
};

constexpr std::array kKinds{"earthquake", "flood", "cyclone", "wildfire", "landslide", "storm"};
constexpr std::array kPlaces{"nepal",  "assam",   "manila", "dhaka",  "odisha",  "kerala",
                             "java",   "chennai", "haiti",  "quito",  "sichuan", "mumbai"};
constexpr std::array kDays{"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
constexpr std::array kAgencies{"red cross", "army", "navy", "fire service", "coast guard"};

template <typename A>
std::string pick(const A& bank, Rng& rng) {
  return bank[rng.below(bank.size())];
}

Event draw_event(Rng& rng) {
  return {pick(kKinds, rng), pick(kPlaces, rng), std::to_string(2 + rng.below(59)), pick(kDays, rng),
          pick(kAgencies, rng)};
}

std::string news_sentence(const Event& e, std::size_t t) {
  switch (t % 6) {
    case 0: return "a powerful " + e.kind + " hit " + e.place + " on " + e.day + " , killing " + e.count + " people , officials said .";
    case 1: return "at least " + e.count + " people were killed when a " + e.kind + " struck " + e.place + " on " + e.day + " .";
    case 2: return "rescue teams from the " + e.agency + " were sent to " + e.place + " after the " + e.kind + " on " + e.day + " .";
    case 3: return "the " + e.kind + " in " + e.place + " left " + e.count + " people dead and many more injured .";
    case 4: return "officials in " + e.place + " said " + e.count + " people died in the " + e.kind + " .";
    default: return "the " + e.agency + " evacuated thousands of residents as the " + e.kind + " approached " + e.place + " .";
  }
}

std::vector<std::string> news_propositions(const Event& e, std::size_t t) {
  switch (t % 6) {
    case 0: return {"a powerful " + e.kind + " hit " + e.place, "the " + e.kind + " hit " + e.place + " on " + e.day,
                    "the " + e.kind + " killed " + e.count + " people", "officials said"};
    case 1: return {"at least " + e.count + " people were killed", "a " + e.kind + " struck " + e.place + " on " + e.day};
    case 2: return {"rescue teams from the " + e.agency + " were sent to " + e.place,
                    "rescue teams were sent after the " + e.kind + " on " + e.day};
    case 3: return {"the " + e.kind + " in " + e.place + " left " + e.count + " people dead",
                    "the " + e.kind + " left many more injured"};
    case 4: return {"officials in " + e.place + " said", e.count + " people died in the " + e.kind};
    default: return {"the " + e.agency + " evacuated thousands of residents", "the " + e.kind + " approached " + e.place};
  }
}

std::string tweet(const Event& e, std::size_t t) {
  switch (t % 6) {
    case 0: return "omg huge " + e.kind + " in " + e.place + " !! " + e.count + " dead #" + e.kind + " #prayfor" + e.place;
    case 1: return e.count + " ppl killed in " + e.place + " " + e.kind + " smh #" + e.kind;
    case 2: return e.agency + " teams headed to " + e.place + " rn pls stay safe #" + e.place;
    case 3: return "just heard abt the " + e.kind + " in " + e.place + " , " + e.count + " dead n many hurt :(";
    case 4: return "rt : " + e.place + " officials say " + e.count + " died in " + e.kind + " #breaking";
    default: return "thousands evacuated as " + e.kind + " nears " + e.place + " , " + e.agency + " on it #" + e.kind;
  }
}

constexpr std::array kOffDomain{
    "the central bank kept interest rates unchanged on {day} .",
    "shares in the carmaker rose sharply after strong quarterly results .",
    "the home side won the cup final after a penalty shootout on {day} .",
    "the coach praised his players after the narrow victory .",
    "inflation eased slightly last month , according to official figures .",
    "the film festival opened on {day} with a sold out screening .",
    "the striker scored twice as the champions extended their lead .",
    "the company announced plans to open a new factory next year .",
};

}  // namespace

ToyCorpus generate_toy_corpus(const ToyCorpusSpec& spec, std::uint64_t seed) {
  ToyCorpus c;
  Rng rng(derive_seed(seed, "toy-corpus"));
  for (std::size_t i = 0; i < spec.tweets; ++i) c.tweets.push_back(tweet(draw_event(rng), rng.below(6)));
  for (std::size_t i = 0; i < spec.news; ++i) c.news.push_back(news_sentence(draw_event(rng), rng.below(6)));
  for (std::size_t i = 0; i < spec.off_domain; ++i) {
    std::string s = pick(kOffDomain, rng);
    if (auto at = s.find("{day}"); at != std::string::npos) s.replace(at, 5, pick(kDays, rng));
    c.off_domain.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < spec.parallel; ++i) {
    const auto e = draw_event(rng);
    const auto t = rng.below(6);
    c.parallel.emplace_back(tweet(e, t), news_sentence(e, t));
  }
  for (std::size_t i = 0; i < spec.news_clauses; ++i) {
    const auto e = draw_event(rng);
    const auto t = rng.below(6);
    c.news_clauses.emplace_back(news_sentence(e, t), news_propositions(e, t));
  }
  for (std::size_t g = 0; g < spec.groups; ++g) {
    const auto e = draw_event(rng);
    std::vector<std::string> group;
    std::string reference;
    const auto start = rng.below(6);
    for (std::size_t j = 0; j < 4; ++j) {
      group.push_back(tweet(e, start + j));
      reference += (j ? " " : "") + news_sentence(e, start + j);
    }
    c.tweet_groups.push_back(std::move(group));
    c.group_references.push_back(std::move(reference));
  }
  return c;
}

}  // namespace tweetnews::datakit
