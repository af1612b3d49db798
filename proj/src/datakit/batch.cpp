#include "tweetnews/datakit/batch.hpp"

#include <algorithm>

#include "tweetnews/error.hpp"

namespace tweetnews::datakit {

std::vector<TokenId> Batch::row(std::size_t r) const {
  auto begin = ids.begin() + static_cast<std::ptrdiff_t>(r * seq_len);
  return {begin, begin + static_cast<std::ptrdiff_t>(lengths[r])};
}

std::vector<std::uint8_t> Batch::mask() const {
  std::vector<std::uint8_t> m(batch_size * seq_len, 0);
  for (std::size_t r = 0; r < batch_size; ++r) {
    std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(r * seq_len), lengths[r], 1);
  }
  return m;
}

std::vector<std::vector<TokenId>> Batch::rows() const {
  std::vector<std::vector<TokenId>> out;
  for (std::size_t r = 0; r < batch_size; ++r) out.push_back(row(r));
  return out;
}

Batch pad_batch(const std::vector<std::vector<TokenId>>& sequences, Style style) {
  if (sequences.empty()) throw DataError("pad_batch: no sequences");
  Batch b;
  b.batch_size = sequences.size();
  for (const auto& s : sequences) {
    if (s.empty()) throw DataError("pad_batch: empty sequence");
    b.seq_len = std::max(b.seq_len, s.size());
  }
  b.ids.assign(b.batch_size * b.seq_len, tokenizer::kPad);
  for (std::size_t r = 0; r < sequences.size(); ++r) {
    std::copy(sequences[r].begin(), sequences[r].end(),
              b.ids.begin() + static_cast<std::ptrdiff_t>(r * b.seq_len));
    b.lengths.push_back(sequences[r].size());
    b.styles.push_back(style);
  }
  return b;
}

std::vector<TokenId> frame(std::span<const TokenId> ids) {
  std::vector<TokenId> out;
  out.reserve(ids.size() + 2);
  out.push_back(tokenizer::kBos);
  out.insert(out.end(), ids.begin(), ids.end());
  out.push_back(tokenizer::kEos);
  return out;
}

std::vector<Batch> make_batches(const std::vector<std::string>& sentences, const tokenizer::Vocab& vocab,
                                std::size_t size, Style style, std::size_t max_len) {
  if (size == 0) throw ConfigError("make_batches: batch size must be positive");
  std::vector<Batch> out;
  std::vector<std::vector<TokenId>> pending;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto framed = frame(vocab.encode(sentences[i]));
    if (framed.size() > max_len) {
      throw DataError("make_batches: sentence " + std::to_string(i) + " has " +
                      std::to_string(framed.size()) + " tokens, over max_len " + std::to_string(max_len));
    }
    pending.push_back(std::move(framed));
    if (pending.size() == size) {
      out.push_back(pad_batch(pending, style));
      pending.clear();
    }
  }
  if (!pending.empty()) out.push_back(pad_batch(pending, style));
  return out;
}

std::vector<std::vector<TokenId>> make_streams(std::span<const TokenId> tokens, std::size_t stream_len) {
  if (stream_len == 0) throw ConfigError("make_streams: stream_len must be positive");
  std::vector<std::vector<TokenId>> out;
  for (std::size_t start = 0; start + stream_len <= tokens.size(); start += stream_len) {
    out.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                     tokens.begin() + static_cast<std::ptrdiff_t>(start + stream_len));
  }
  return out;
}

std::vector<std::vector<TokenId>> make_streams(const std::vector<std::string>& corpus,
                                               const tokenizer::Vocab& vocab, std::size_t stream_len) {
  std::vector<TokenId> all;
  for (const auto& line : corpus) {
    auto ids = vocab.encode(line);
    if (ids.empty()) continue;
    all.insert(all.end(), ids.begin(), ids.end());
    all.push_back(tokenizer::kEos);
  }
  return make_streams(all, stream_len);
}

}  // namespace tweetnews::datakit
