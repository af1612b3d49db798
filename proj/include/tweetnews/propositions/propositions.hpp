#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tweetnews/model/transformer.hpp"
#include "tweetnews/tokenizer/bpe.hpp"

namespace tweetnews::propositions {

enum class RecordSource { kGenerated, kIngested };

struct PropositionRecord {
  std::string sentence;
  std::vector<std::string> propositions;
  RecordSource source = RecordSource::kIngested;

  bool operator==(const PropositionRecord&) const = default;
};

/// subject relation [object] [pp...]
struct Clause {
  std::string subject;
  std::string relation;
  std::string object;
  std::vector<std::string> pps;

  std::string text() const;
};

/// Template composition for one generated sentence:
///   main-subject [who|which rel] main-rest [after event] [and conj]
struct SentenceAst {
  Clause main;
  std::optional<std::string> rel_pronoun;  // set together with rel
  std::optional<Clause> rel;                // subject equals main.subject
  std::optional<Clause> after;
  std::optional<Clause> conj;
  /// Redundant proposition: copy of propositions[index] with `word`
  /// replaced by `synonym`.
  struct Redundancy {
    std::size_t index = 0;
    std::string word, synonym;
  };
  std::optional<Redundancy> redundancy;
};

std::string render_sentence(const SentenceAst& ast);

/// Proposition list implied by the composition rules: the main clause with
/// its object and first PP, then one proposition per further PP, the
/// relative clause, the temporal link and the event, the conjunct, and
/// finally the redundant copy.
std::vector<std::string> derive_propositions(const SentenceAst& ast);

struct GeneratedRecord {
  PropositionRecord record;
  SentenceAst ast;
};

/// Deterministic in seed. Every record has at least two propositions;
/// about 30% carry a redundant synonym proposition. Throws ConfigError
/// for n <= 0.
std::vector<GeneratedRecord> generate_templated_ast(long n, std::uint64_t seed);
std::vector<PropositionRecord> generate_templated(long n, std::uint64_t seed);

/// Words that may appear in a generated sentence without appearing in any
/// of its propositions.
const std::vector<std::string>& connective_words();

struct IngestReport {
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t dropped_short = 0;  // fewer than two propositions
  std::vector<std::string> malformed;  // "origin:line: reason"
};

/// Clause file: one record per line, `sentence<TAB>prop1<TAB>prop2...`.
/// Blank lines are ignored; a trailing period on a proposition is removed.
std::vector<PropositionRecord> parse_clause_stream(std::istream& in, const std::string& origin,
                                                   IngestReport* report = nullptr);
std::vector<PropositionRecord> ingest_clause_file(const std::filesystem::path& path, IngestReport* report = nullptr);
void write_clause_file(const std::filesystem::path& path, const std::vector<PropositionRecord>& records);

/// P(y): "p1. p2. ... pn."
std::string join_propositions(std::span<const std::string> props);

inline constexpr std::size_t kMaxSourceTokens = 512;

struct MergePair {
  std::string source;  // P(y), possibly truncated
  std::string target;  // y
  std::size_t n_propositions = 0;
};

struct BuildReport {
  std::size_t records = 0;
  std::size_t emitted = 0;
  std::size_t truncated = 0;
  std::size_t dropped = 0;  // fewer than two propositions survive
};

/// Keeps the longest proposition prefix whose encoded P(y) fits in
/// max_tokens BPE tokens; drops pairs left with fewer than two.
std::vector<MergePair> build_merge_pairs(const std::vector<PropositionRecord>& records, const tokenizer::Vocab& vocab,
                                         std::size_t max_tokens = kMaxSourceTokens, BuildReport* report = nullptr);

struct ScanReport {
  std::size_t pairs = 0;
  std::size_t too_few = 0;
  std::size_t too_long = 0;
  std::vector<std::string> problems;  // "line N: reason"
  bool ok() const { return too_few == 0 && too_long == 0 && problems.empty(); }
};

/// Checks a `source<TAB>target` pair file against both data rules.
ScanReport scan_merge_pairs(std::istream& in, const tokenizer::Vocab& vocab, std::size_t max_tokens = kMaxSourceTokens);

using MergeFn = std::function<std::string(const std::string& a, const std::string& b)>;

/// Merges (1,2), (3,4), ... and joins the results with spaces; an odd last
/// sentence passes through; one sentence is returned unchanged.
std::string pairwise_merge(const std::vector<std::string>& sentences, const MergeFn& merge);

/// Greedy merge with a trained model, returning the generated ids: source
/// "a. b." encoded as propositions, decoded as a sentence, at most
/// len(a) + len(b) tokens.
std::vector<tokenizer::TokenId> merge_ids(model::StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                          const std::string& a, const std::string& b);

/// merge_ids followed by decoding.
MergeFn model_merge_fn(model::StyleTransferModel& model, const tokenizer::Vocab& vocab);

}  // namespace tweetnews::propositions
