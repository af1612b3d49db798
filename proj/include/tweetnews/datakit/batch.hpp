#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tweetnews/tokenizer/bpe.hpp"

namespace tweetnews {

/// Style tag. l1/l2 are tweets/news for style transfer and
/// propositions/sentences for the merge model.
enum class Style : int {
  kL1 = 0,
  kL2 = 1,
  kTweet = kL1,
  kNews = kL2,
  kProposition = kL1,
  kSentence = kL2,
};

inline const char* style_name(Style s) { return s == Style::kL1 ? "l1" : "l2"; }

}  // namespace tweetnews

namespace tweetnews::datakit {

using tokenizer::TokenId;

/// Row-major [batch_size, seq_len] token ids padded with PAD, plus the
/// unpadded length and style tag of every row.
struct Batch {
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<TokenId> ids;
  std::vector<std::size_t> lengths;
  std::vector<Style> styles;

  TokenId at(std::size_t row, std::size_t pos) const { return ids[row * seq_len + pos]; }
  std::vector<TokenId> row(std::size_t r) const;
  /// 1 where a position holds a real token, 0 for padding.
  std::vector<std::uint8_t> mask() const;
  std::vector<std::vector<TokenId>> rows() const;
};

/// Pads sequences to the longest one. Throws DataError on an empty list or
/// an empty sequence.
Batch pad_batch(const std::vector<std::vector<TokenId>>& sequences, Style style);

/// Wraps ids as BOS ids EOS.
std::vector<TokenId> frame(std::span<const TokenId> ids);

/// Encodes, frames and groups sentences into batches of `size` in input
/// order (the last batch may be smaller). Framed sentences longer than
/// max_len are rejected with DataError, never truncated.
std::vector<Batch> make_batches(const std::vector<std::string>& sentences, const tokenizer::Vocab& vocab,
                                std::size_t size, Style style, std::size_t max_len);

/// Contiguous windows of stream_len tokens over the concatenation of all
/// encoded lines, with EOS after each line. The final partial window is
/// dropped.
std::vector<std::vector<TokenId>> make_streams(std::span<const TokenId> tokens, std::size_t stream_len = 256);
std::vector<std::vector<TokenId>> make_streams(const std::vector<std::string>& corpus,
                                               const tokenizer::Vocab& vocab, std::size_t stream_len = 256);

}  // namespace tweetnews::datakit
