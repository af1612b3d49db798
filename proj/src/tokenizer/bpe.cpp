#include "tweetnews/tokenizer/bpe.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tweetnews/error.hpp"

namespace tweetnews::tokenizer {

namespace {

constexpr std::string_view kSpecialNames[] = {"<pad>", "<s>", "</s>", "<mask>", "<unk>"};
constexpr std::string_view kHeader = "bpe-vocab v1";

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Splits a word into UTF-8 code points; stray bytes become single symbols.
std::vector<std::string> code_points(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    len = std::min(len, word.size() - i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> word_symbols(std::string_view word) {
  auto symbols = code_points(word);
  if (!symbols.empty()) symbols.back() += kEndOfWord;
  return symbols;
}

constexpr std::uint64_t pair_key(TokenId a, TokenId b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

bool ends_with_eow(const std::string& s) {
  return s.size() >= kEndOfWord.size() &&
         std::string_view(s).substr(s.size() - kEndOfWord.size()) == kEndOfWord;
}

// Replaces every non-overlapping (a, b) occurrence, scanning left to right.
bool merge_in_place(std::vector<TokenId>& word, TokenId a, TokenId b, TokenId merged) {
  bool changed = false;
  std::size_t out = 0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i + 1 < word.size() && word[i] == a && word[i + 1] == b) {
      word[out++] = merged;
      ++i;
      changed = true;
    } else {
      word[out++] = word[i];
    }
  }
  word.resize(out);
  return changed;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  const std::string norm = normalize(text);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    words.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

void Vocab::add_token(std::string token) {
  const auto id = static_cast<TokenId>(tokens_.size());
  ids_.emplace(token, id);
  tokens_.push_back(std::move(token));
}

void Vocab::index_merges() {
  merge_rank_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r) {
    const auto& [l, rt] = merges_[r];
    auto a = id_of(l), b = id_of(rt), m = id_of(l + rt);
    if (!a || !b || !m) throw DataError("bpe vocab: merge '" + l + " " + rt + "' refers to unknown tokens");
    merge_rank_.emplace(pair_key(*a, *b), std::make_pair(r, *m));
  }
}

Vocab Vocab::train(std::string_view corpus, std::size_t vocab_size) {
  std::map<std::string, std::int64_t> word_counts;
  std::size_t start = 0;
  while (start <= corpus.size()) {
    std::size_t end = corpus.find('\n', start);
    if (end == std::string_view::npos) end = corpus.size();
    for (auto& w : split_words(corpus.substr(start, end - start))) ++word_counts[w];
    start = end + 1;
  }
  if (word_counts.empty()) throw DataError("train_bpe: empty corpus");

  std::set<std::string> base;
  for (const auto& [w, c] : word_counts) {
    for (auto& s : word_symbols(w)) base.insert(std::move(s));
  }
  if (vocab_size <= base.size() + kNumSpecials) {
    throw ConfigError("train_bpe: vocab_size " + std::to_string(vocab_size) + " must exceed " +
                      std::to_string(base.size()) + " symbols + " + std::to_string(kNumSpecials) +
                      " specials");
  }

  Vocab v;
  for (auto name : kSpecialNames) v.add_token(std::string(name));
  for (const auto& s : base) v.add_token(s);
  v.base_symbols_ = base.size();

  std::vector<std::vector<TokenId>> words;
  std::vector<std::int64_t> counts;
  for (const auto& [w, c] : word_counts) {
    std::vector<TokenId> ids;
    for (const auto& s : word_symbols(w)) ids.push_back(v.ids_.at(s));
    words.push_back(std::move(ids));
    counts.push_back(c);
  }

  std::set<std::uint64_t> blocked;  // pairs whose concatenation already names a token
  while (v.size() < vocab_size) {
    std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto& w = words[i];
      for (std::size_t j = 0; j + 1 < w.size(); ++j) pair_counts[pair_key(w[j], w[j + 1])] += counts[i];
    }
    std::int64_t best_count = 0;
    std::uint64_t best = 0;
    for (const auto& [key, count] : pair_counts) {
      if (blocked.count(key)) continue;
      if (count < best_count) continue;
      if (count > best_count) {
        best_count = count;
        best = key;
        continue;
      }
      const auto& l = v.tokens_[key >> 32];
      const auto& r = v.tokens_[key & 0xFFFFFFFFu];
      const auto& bl = v.tokens_[best >> 32];
      const auto& br = v.tokens_[best & 0xFFFFFFFFu];
      if (std::tie(l, r) < std::tie(bl, br)) best = key;
    }
    if (best_count == 0) break;
    const auto a = static_cast<TokenId>(best >> 32);
    const auto b = static_cast<TokenId>(best & 0xFFFFFFFFu);
    std::string merged = v.tokens_[a] + v.tokens_[b];
    if (v.ids_.count(merged)) {
      blocked.insert(best);
      continue;
    }
    v.merges_.emplace_back(v.tokens_[a], v.tokens_[b]);
    v.add_token(merged);
    const TokenId m = v.ids_.at(merged);
    for (auto& w : words) merge_in_place(w, a, b, m);
  }
  v.index_merges();
  return v;
}

std::optional<TokenId> Vocab::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw DataError("unknown token id " + std::to_string(id) + " (vocab size " +
                    std::to_string(tokens_.size()) + ")");
  }
  return tokens_[id];
}

std::vector<TokenId> Vocab::encode_word(std::string_view word) const {
  std::vector<TokenId> ids;
  for (const auto& s : word_symbols(word)) {
    auto it = ids_.find(s);
    // Specials are never produced from text even when spelled out.
    ids.push_back(it == ids_.end() || it->second < kNumSpecials ? kUnk : it->second);
  }
  while (ids.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    std::pair<TokenId, TokenId> best_pair{};
    TokenId best_merged = kUnk;
    for (std::size_t j = 0; j + 1 < ids.size(); ++j) {
      auto it = merge_rank_.find(pair_key(ids[j], ids[j + 1]));
      if (it != merge_rank_.end() && it->second.first < best_rank) {
        best_rank = it->second.first;
        best_pair = {ids[j], ids[j + 1]};
        best_merged = it->second.second;
      }
    }
    if (best_rank == SIZE_MAX) break;
    merge_in_place(ids, best_pair.first, best_pair.second, best_merged);
  }
  return ids;
}

std::vector<TokenId> Vocab::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (const auto& w : split_words(text)) {
    auto ids = encode_word(w);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

std::string Vocab::decode(std::span<const TokenId> ids) const {
  std::string out;
  bool in_word = false;
  for (TokenId id : ids) {
    const std::string& tok = token_of(id);
    if (id == kPad || id == kBos || id == kEos) continue;
    if (id == kMask || id == kUnk) {
      if (!out.empty()) out.push_back(' ');
      out += tok;
      in_word = false;
      continue;
    }
    if (!in_word && !out.empty()) out.push_back(' ');
    if (ends_with_eow(tok)) {
      out.append(tok, 0, tok.size() - kEndOfWord.size());
      in_word = false;
    } else {
      out += tok;
      in_word = true;
    }
  }
  return out;
}

std::string Vocab::serialize() const {
  std::ostringstream out;
  out << kHeader << '\n';
  out << "merges " << merges_.size() << '\n';
  for (const auto& [l, r] : merges_) out << l << ' ' << r << '\n';
  out << "tokens " << tokens_.size() << ' ' << base_symbols_ << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << i << '\t' << tokens_[i] << '\n';
  return out.str();
}

Vocab Vocab::deserialize(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [](const std::string& why) -> Vocab { throw DataError("bpe vocab file: " + why); };
  if (!std::getline(in, line) || line != kHeader) return fail("missing 'bpe-vocab v1' header");
  std::size_t n_merges = 0, n_tokens = 0, n_base = 0;
  std::string word;
  if (!std::getline(in, line)) return fail("missing merges line");
  {
    std::istringstream ls(line);
    if (!(ls >> word >> n_merges) || word != "merges") return fail("bad merges line '" + line + "'");
  }
  Vocab v;
  for (std::size_t i = 0; i < n_merges; ++i) {
    if (!std::getline(in, line)) return fail("truncated merge list");
    const auto sp = line.find(' ');
    if (sp == std::string::npos) return fail("bad merge line '" + line + "'");
    v.merges_.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  if (!std::getline(in, line)) return fail("missing tokens line");
  {
    std::istringstream ls(line);
    if (!(ls >> word >> n_tokens >> n_base) || word != "tokens") return fail("bad tokens line '" + line + "'");
  }
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (!std::getline(in, line)) return fail("truncated token list");
    const auto tab = line.find('\t');
    if (tab == std::string::npos || std::stoul(line.substr(0, tab)) != i) {
      return fail("bad token line '" + line + "'");
    }
    v.add_token(line.substr(tab + 1));
  }
  if (v.size() < static_cast<std::size_t>(kNumSpecials)) return fail("missing special tokens");
  v.base_symbols_ = n_base;
  v.index_merges();
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocab file " + path.string());
  out << serialize();
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocab file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace tweetnews::tokenizer
