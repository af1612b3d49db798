#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tweetnews::tokenizer {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kMask = 3;
inline constexpr TokenId kUnk = 4;
inline constexpr TokenId kNumSpecials = 5;

/// Suffix marking a word-final subword.
inline constexpr std::string_view kEndOfWord = "</w>";

/// ASCII-lowercases, collapses whitespace runs to one space and trims.
std::string normalize(std::string_view text);

/// Splits normalized text into words.
std::vector<std::string> split_words(std::string_view text);

/// Byte-pair-encoding vocabulary. Immutable once built.
class Vocab {
 public:
  /// Greedy pair-merge training over whitespace-separated words. Ties between
  /// equally frequent pairs go to the lexicographically smaller (left, right).
  static Vocab train(std::string_view corpus, std::size_t vocab_size);

  std::vector<TokenId> encode(std::string_view text) const;
  /// Throws DataError on ids outside the vocabulary. PAD/BOS/EOS are skipped;
  /// MASK and UNK render as standalone words.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t size() const { return tokens_.size(); }
  std::optional<TokenId> id_of(std::string_view token) const;
  const std::string& token_of(TokenId id) const;
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  /// Number of single-character symbols (excluding specials).
  std::size_t base_symbol_count() const { return base_symbols_; }

  std::string serialize() const;
  static Vocab deserialize(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

 private:
  void add_token(std::string token);
  void index_merges();
  std::vector<TokenId> encode_word(std::string_view word) const;

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::unordered_map<std::uint64_t, std::pair<std::size_t, TokenId>> merge_rank_;
  std::size_t base_symbols_ = 0;
};

}  // namespace tweetnews::tokenizer
