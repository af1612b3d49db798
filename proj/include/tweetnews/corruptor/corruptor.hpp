#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::corruptor {

struct CorruptionSpec {
  double spell_p = 0.15;
  double ne_hashtag_p = 0.15;
  double random_hashtag_p = 0.15;
  std::vector<std::string> hashtag_pool;
  // Paraphrase hook defaults.
  double synonym_p = 0.2;
  double function_drop_p = 0.1;

  /// Throws ConfigError on probabilities outside [0, 1] or an empty pool
  /// with random_hashtag_p > 0.
  void validate() const;
};

/// Counters for measuring realised rates. Denominators are the units each
/// probability applies to: alphabetic words for spelling, detected
/// entities for entity hashtags, sentences for injection.
struct CorruptionStats {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t spelled = 0;
  std::size_t entities = 0;
  std::size_t entities_hashtagged = 0;
  std::size_t injected = 0;
  std::size_t synonyms = 0;
  std::size_t function_drops = 0;

  CorruptionStats& operator+=(const CorruptionStats& o);
};

enum class SpellMode { kSwap, kDrop, kDevowel };

/// Removes a, e, i, o, u (either case). "storm" -> "strm".
std::string remove_vowels(const std::string& word);

/// Applies one spelling mode. Swap and drop pick their position from rng;
/// they require at least two characters. A result that would be empty
/// leaves the word unchanged.
std::string apply_spell_mode(const std::string& word, SpellMode mode, Rng& rng);

/// Most frequent `#`-prefixed tokens across the tweets (ties broken
/// alphabetically), lowercased.
std::vector<std::string> build_hashtag_pool(const std::vector<std::string>& tweets, std::size_t top = 100);

/// Entity lists are lowercase phrases; multiword phrases are space separated.
std::vector<std::string> default_gazetteer();
/// word -> synonym.
std::map<std::string, std::string> default_lexicon();

/// Tab-separated `word<TAB>synonym` (lexicon) or `original<TAB>paraphrase`
/// (sentence table) files.
std::map<std::string, std::string> load_tsv_map(const std::filesystem::path& path);
/// One phrase per line.
std::vector<std::string> load_lines(const std::filesystem::path& path);

/// The corruption function H: paraphrase, then per-word spelling noise,
/// then entity hashtags and random hashtag injection. Pure given
/// (sentence, seed).
class Corruptor {
 public:
  explicit Corruptor(CorruptionSpec spec, std::map<std::string, std::string> lexicon = default_lexicon(),
                     std::vector<std::string> gazetteer = default_gazetteer());

  const CorruptionSpec& spec() const { return spec_; }

  /// Exact sentences mapped to external paraphrases (e.g. round-trip MT
  /// output); these bypass the lexical hook.
  void set_paraphrase_table(std::map<std::string, std::string> table) { table_ = std::move(table); }

  std::string paraphrase(const std::string& sentence, Rng& rng, CorruptionStats* stats = nullptr) const;
  /// Non-alphabetic tokens pass through untouched.
  std::string spell_noise(const std::string& word, Rng& rng, CorruptionStats* stats = nullptr) const;
  std::string hashtag_entities(const std::string& sentence, Rng& rng, CorruptionStats* stats = nullptr) const;
  std::string inject_random_hashtag(const std::string& sentence, Rng& rng, CorruptionStats* stats = nullptr) const;

  std::string corrupt(const std::string& sentence, std::uint64_t seed, CorruptionStats* stats = nullptr) const;

  /// Entity spans as [begin, end) word indices over the whitespace tokens.
  std::vector<std::pair<std::size_t, std::size_t>> detect_entities(const std::vector<std::string>& words) const;

 private:
  CorruptionSpec spec_;
  std::map<std::string, std::string> lexicon_;
  std::map<std::string, std::string> table_;
  std::vector<std::vector<std::string>> gazetteer_;  // tokenized, longest first
};

}  // namespace tweetnews::corruptor
