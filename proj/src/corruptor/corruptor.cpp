#include "tweetnews/corruptor/corruptor.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tweetnews/error.hpp"

namespace tweetnews::corruptor {

namespace {

const std::set<std::string>& function_words() {
  static const std::set<std::string> words = {"a",    "an",   "the",  "of",   "in",   "on",   "at",    "to",
                                              "for",  "with", "by",   "from", "and",  "has",  "have",  "had",
                                              "been", "is",   "was",  "were", "are",  "that", "which", "its",
                                              "their", "as",  "into", "after", "over", "be"};
  return words;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_ws(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (w.empty()) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

bool is_alpha(unsigned char c) { return std::isalpha(c) != 0; }

// A token split into leading punctuation, alphanumeric core, trailing punctuation.
struct Parts {
  std::string lead, core, trail;
};

Parts split_token(const std::string& tok) {
  std::size_t b = 0, e = tok.size();
  while (b < e && !std::isalnum(static_cast<unsigned char>(tok[b]))) ++b;
  while (e > b && !std::isalnum(static_cast<unsigned char>(tok[e - 1]))) --e;
  return {tok.substr(0, b), tok.substr(b, e - b), tok.substr(e)};
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool all_alpha(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return is_alpha(static_cast<unsigned char>(c)); });
}

bool is_tag(const std::string& tok) { return !tok.empty() && (tok[0] == '#' || tok[0] == '@'); }

bool title_case(const std::string& core) {
  if (!all_alpha(core) || !std::isupper(static_cast<unsigned char>(core[0]))) return false;
  return std::all_of(core.begin() + 1, core.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

void check_p(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("corruption spec: ") + name + " must lie in [0, 1]");
}

}  // namespace

void CorruptionSpec::validate() const {
  check_p(spell_p, "spell_p");
  check_p(ne_hashtag_p, "ne_hashtag_p");
  check_p(random_hashtag_p, "random_hashtag_p");
  check_p(synonym_p, "synonym_p");
  check_p(function_drop_p, "function_drop_p");
  if (random_hashtag_p > 0.0 && hashtag_pool.empty()) {
    throw ConfigError("corruption spec: hashtag pool is empty but random_hashtag_p > 0");
  }
}

CorruptionStats& CorruptionStats::operator+=(const CorruptionStats& o) {
  sentences += o.sentences;
  words += o.words;
  spelled += o.spelled;
  entities += o.entities;
  entities_hashtagged += o.entities_hashtagged;
  injected += o.injected;
  synonyms += o.synonyms;
  function_drops += o.function_drops;
  return *this;
}

std::string remove_vowels(const std::string& word) {
  std::string out;
  for (char c : word) {
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'a': case 'e': case 'i': case 'o': case 'u': break;
      default: out += c;
    }
  }
  return out;
}

std::string apply_spell_mode(const std::string& word, SpellMode mode, Rng& rng) {
  std::string out = word;
  switch (mode) {
    case SpellMode::kSwap:
      if (word.size() >= 2) {
        const auto i = rng.below(word.size() - 1);
        std::swap(out[i], out[i + 1]);
      }
      break;
    case SpellMode::kDrop:
      if (word.size() >= 2) out.erase(rng.below(word.size()), 1);
      break;
    case SpellMode::kDevowel:
      out = remove_vowels(word);
      break;
  }
  return out.empty() ? word : out;
}

std::vector<std::string> build_hashtag_pool(const std::vector<std::string>& tweets, std::size_t top) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tweets) {
    for (const auto& tok : split_ws(t)) {
      if (tok.size() < 2 || tok[0] != '#') continue;
      auto core = split_token(tok.substr(1)).core;
      if (!core.empty()) ++counts["#" + lower(core)];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < top; ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<std::string> default_gazetteer() {
  return {"pakistan",  "peshawar",  "india",      "nepal",       "kathmandu",   "chile",     "haiti",
          "japan",     "tokyo",     "philippines", "manila",     "odisha",      "bangladesh", "dhaka",
          "texas",     "houston",   "california", "florida",     "mexico",      "indonesia", "jakarta",
          "turkey",    "italy",     "greece",     "new zealand", "sri lanka",   "red cross", "united nations",
          "world health organization", "national guard", "kerala", "mumbai", "chennai", "puerto rico",
          "louisiana", "new orleans", "oklahoma", "ecuador", "peru", "vanuatu", "fiji", "myanmar",
          "taliban", "unicef", "fema", "amnesty international"};
}

std::map<std::string, std::string> default_lexicon() {
  return {{"killed", "dead"},          {"injured", "hurt"},        {"people", "persons"},
          {"hospital", "clinic"},      {"earthquake", "quake"},    {"residents", "locals"},
          {"rescue", "relief"},        {"destroyed", "wrecked"},   {"damaged", "hit"},
          {"heavy", "intense"},        {"missing", "unaccounted"}, {"officials", "authorities"},
          {"evacuated", "moved"},      {"flooding", "floods"},     {"attack", "assault"},
          {"fire", "blaze"},           {"children", "kids"},       {"homes", "houses"},
          {"thousands", "many"},       {"government", "govt"},     {"announced", "said"},
          {"reported", "said"},        {"struck", "hit"},          {"victims", "casualties"},
          {"large", "big"},            {"powerful", "strong"},     {"continue", "go on"},
          {"emergency", "crisis"},     {"workers", "staff"},       {"airlifted", "flown"},
          {"police", "cops"},          {"storm", "cyclone"},       {"town", "city"},
          {"villages", "hamlets"},     {"collapsed", "fell"},      {"trapped", "stuck"},
          {"supplies", "aid"},         {"shelter", "refuge"},      {"warning", "alert"},
          {"deaths", "fatalities"}};
}

std::map<std::string, std::string> load_tsv_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ":" + std::to_string(n) + ": expected a tab");
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::vector<std::string> load_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

Corruptor::Corruptor(CorruptionSpec spec, std::map<std::string, std::string> lexicon,
                     std::vector<std::string> gazetteer)
    : spec_(std::move(spec)), lexicon_(std::move(lexicon)) {
  spec_.validate();
  for (const auto& g : gazetteer) {
    auto words = split_ws(lower(g));
    if (!words.empty()) gazetteer_.push_back(std::move(words));
  }
  std::stable_sort(gazetteer_.begin(), gazetteer_.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

std::string Corruptor::paraphrase(const std::string& sentence, Rng& rng, CorruptionStats* stats) const {
  if (auto it = table_.find(sentence); it != table_.end()) return it->second;
  auto words = split_ws(sentence);
  std::vector<std::string> out;
  CorruptionStats local;
  for (const auto& w : words) {
    auto parts = split_token(w);
    const auto key = lower(parts.core);
    if (!is_tag(w) && function_words().count(key)) {
      if (rng.bernoulli(spec_.function_drop_p)) {
        ++local.function_drops;
        continue;
      }
    } else if (auto it = lexicon_.find(key); !is_tag(w) && it != lexicon_.end()) {
      if (rng.bernoulli(spec_.synonym_p)) {
        ++local.synonyms;
        out.push_back(parts.lead + it->second + parts.trail);
        continue;
      }
    }
    out.push_back(w);
  }
  if (out.empty()) return sentence;
  if (stats) *stats += local;
  return join_ws(out);
}

std::string Corruptor::spell_noise(const std::string& word, Rng& rng, CorruptionStats* stats) const {
  if (is_tag(word)) return word;
  auto parts = split_token(word);
  if (!all_alpha(parts.core)) return word;
  if (stats) ++stats->words;
  if (!rng.bernoulli(spec_.spell_p)) return word;
  if (stats) ++stats->spelled;
  SpellMode mode = SpellMode::kDevowel;
  if (parts.core.size() >= 2) mode = static_cast<SpellMode>(rng.below(3));
  return parts.lead + apply_spell_mode(parts.core, mode, rng) + parts.trail;
}

std::vector<std::pair<std::size_t, std::size_t>> Corruptor::detect_entities(
    const std::vector<std::string>& words) const {
  std::vector<std::string> cores;
  for (const auto& w : words) cores.push_back(is_tag(w) ? std::string() : lower(split_token(w).core));
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    for (const auto& g : gazetteer_) {
      if (i + g.size() > words.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < g.size() && ok; ++k) {
        ok = cores[i + k] == g[k];
        // Only the last word of a multiword entity may carry trailing punctuation.
        if (ok && k + 1 < g.size() && !split_token(words[i + k]).trail.empty()) ok = false;
      }
      if (ok) {
        matched = g.size();
        break;
      }
    }
    if (matched == 0 && !is_tag(words[i]) && title_case(split_token(words[i]).core)) {
      std::size_t j = i + 1;
      while (j < words.size() && !is_tag(words[j]) && title_case(split_token(words[j]).core) &&
             split_token(words[j - 1]).trail.empty()) {
        ++j;
      }
      // A lone capitalised first word is just sentence case.
      if (i > 0 || j - i >= 2) matched = j - i;
    }
    if (matched > 0) {
      spans.emplace_back(i, i + matched);
      i += matched;
    } else {
      ++i;
    }
  }
  return spans;
}

std::string Corruptor::hashtag_entities(const std::string& sentence, Rng& rng, CorruptionStats* stats) const {
  auto words = split_ws(sentence);
  auto spans = detect_entities(words);
  std::vector<std::string> out;
  std::size_t next = 0;
  for (auto [b, e] : spans) {
    if (stats) ++stats->entities;
    while (next < b) out.push_back(words[next++]);
    if (rng.bernoulli(spec_.ne_hashtag_p)) {
      if (stats) ++stats->entities_hashtagged;
      std::string tag = split_token(words[b]).lead + "#";
      for (std::size_t k = b; k < e; ++k) tag += lower(split_token(words[k]).core);
      tag += split_token(words[e - 1]).trail;
      out.push_back(tag);
    } else {
      for (std::size_t k = b; k < e; ++k) out.push_back(words[k]);
    }
    next = e;
  }
  while (next < words.size()) out.push_back(words[next++]);
  return join_ws(out);
}

std::string Corruptor::inject_random_hashtag(const std::string& sentence, Rng& rng, CorruptionStats* stats) const {
  if (!rng.bernoulli(spec_.random_hashtag_p)) return sentence;
  if (stats) ++stats->injected;
  const auto& tag = spec_.hashtag_pool[rng.below(spec_.hashtag_pool.size())];
  return rng.bernoulli(0.5) ? sentence + " " + tag : tag + " " + sentence;
}

std::string Corruptor::corrupt(const std::string& sentence, std::uint64_t seed, CorruptionStats* stats) const {
  Rng rng(seed);
  CorruptionStats local;
  ++local.sentences;
  auto s = paraphrase(sentence, rng, &local);
  auto words = split_ws(s);
  for (auto& w : words) w = spell_noise(w, rng, &local);
  s = join_ws(words);
  s = hashtag_entities(s, rng, &local);
  s = inject_random_hashtag(s, rng, &local);
  if (stats) *stats += local;
  return s;
}

}  // namespace tweetnews::corruptor
