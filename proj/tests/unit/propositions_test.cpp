#include <algorithm>
#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "tweetnews/error.hpp"
#include "tweetnews/propositions/propositions.hpp"

using namespace tweetnews;
using namespace tweetnews::propositions;

namespace {

std::vector<std::string> words_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string spaced(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    out += (out.empty() ? "" : " ") + p;
  }
  return out;
}

// Independent re-derivation of the proposition list from the AST, written
// from the composition rules rather than shared with the generator.
std::vector<std::string> oracle_props(const SentenceAst& a) {
  std::vector<std::string> out;
  auto clause = [&](const Clause& c) {
    const auto head = spaced({c.subject, c.relation, c.object});
    if (c.pps.empty()) out.push_back(head);
    for (const auto& pp : c.pps) out.push_back(head + " " + pp);
  };
  clause(a.main);
  if (a.rel) out.push_back(spaced({a.rel->subject, a.rel->relation, a.rel->object}) +
                           (a.rel->pps.empty() ? "" : " " + a.rel->pps[0]));
  if (a.after) {
    std::string ev = spaced({a.after->subject, a.after->relation, a.after->object});
    for (const auto& pp : a.after->pps) ev += " " + pp;
    out.push_back(spaced({a.main.subject, a.main.relation, a.main.object}) + " after " + ev);
    out.push_back(ev);
  }
  if (a.conj) clause(*a.conj);
  if (a.redundancy) {
    auto w = words_of(out.at(a.redundancy->index));
    auto it = std::find(w.begin(), w.end(), a.redundancy->word);
    REQUIRE(it != w.end());
    *it = a.redundancy->synonym;
    out.push_back(spaced(w));
  }
  return out;
}

std::filesystem::path fixture(const char* name) { return std::filesystem::path(TWEETNEWS_FIXTURES) / name; }

const tokenizer::Vocab& vocab() {
  static const tokenizer::Vocab v = [] {
    std::string corpus;
    for (const auto& r : generate_templated(200, 1)) {
      corpus += r.sentence + "\n";
      for (const auto& p : r.propositions) corpus += p + ".\n";
    }
    return tokenizer::Vocab::train(corpus, 400);
  }();
  return v;
}

}  // namespace

TEST_CASE("after-template yields both clauses as propositions") {
  SentenceAst a;
  a.main = {"soldiers", "rescued", "two children", {}};
  a.after = Clause{"a cyclone", "hit", "the coast", {}};
  CHECK(render_sentence(a) == "soldiers rescued two children after a cyclone hit the coast");
  auto props = derive_propositions(a);
  CHECK(props.size() >= 3);
  CHECK(std::count(props.begin(), props.end(), "soldiers rescued two children") == 1);
  CHECK(std::count(props.begin(), props.end(), "a cyclone hit the coast") == 1);
}

TEST_CASE("generated corpus matches the AST oracle and is deterministic") {
  auto gen = generate_templated_ast(500, 7);
  REQUIRE(gen.size() == 500);
  std::size_t redundant = 0;
  for (const auto& g : gen) {
    CHECK(g.record.propositions == oracle_props(g.ast));
    CHECK(g.record.propositions.size() >= 2);
    CHECK(g.record.source == RecordSource::kGenerated);
    CHECK(g.record.sentence == render_sentence(g.ast));
    redundant += g.ast.redundancy.has_value();
  }
  // About 30% receive a redundant proposition (some draws have no synonym).
  CHECK(redundant > 100);
  CHECK(redundant < 200);
  CHECK(generate_templated(50, 3) == generate_templated(50, 3));
  CHECK_FALSE(generate_templated(50, 3) == generate_templated(50, 4));
  CHECK_THROWS_AS(generate_templated(0, 1), ConfigError);
}

TEST_CASE("sentence tokens are covered by propositions plus connectives") {
  const auto& conn = connective_words();
  for (const auto& r : generate_templated(300, 11)) {
    std::set<std::string> allowed(conn.begin(), conn.end());
    for (const auto& p : r.propositions)
      for (const auto& w : words_of(p)) allowed.insert(w);
    for (const auto& w : words_of(r.sentence)) {
      INFO(r.sentence);
      CHECK(allowed.count(w) == 1);
    }
  }
}

TEST_CASE("airlift clause record parses to eight propositions") {
  IngestReport rep;
  auto recs = ingest_clause_file(fixture("airlift_clauses.tsv"), &rep);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].propositions.size() == 8);
  CHECK(rep.malformed.empty());
  auto src = join_propositions(recs[0].propositions);
  CHECK(src.rfind("a young woman has been airlifted to hospital.", 0) == 0);
  CHECK(src.back() == '.');
}

TEST_CASE("ingestion drops short records and reports malformed lines") {
  std::istringstream in(
      "s one\tp1\tp2\n"
      "\n"
      "s two\tonly one\n"
      "no tabs here\n"
      "\tp1\tp2\n"
      "s three\tp1\t\tp3\n"
      "s four\tp1.\tp2 .\n");
  IngestReport rep;
  auto recs = parse_clause_stream(in, "mem", &rep);
  CHECK(recs.size() == 2);
  CHECK(rep.dropped_short == 1);
  REQUIRE(rep.malformed.size() == 3);
  CHECK(rep.malformed[0].rfind("mem:4:", 0) == 0);
  CHECK(rep.malformed[1].rfind("mem:5:", 0) == 0);
  CHECK(rep.malformed[2].rfind("mem:6:", 0) == 0);
  CHECK(recs[1].propositions == std::vector<std::string>{"p1", "p2"});
  std::istringstream empty("");
  CHECK(parse_clause_stream(empty, "empty").empty());
}

TEST_CASE("write then ingest is the identity") {
  auto recs = generate_templated(40, 5);
  for (auto& r : recs) r.source = RecordSource::kIngested;
  auto path = std::filesystem::temp_directory_path() / "tweetnews_clauses_rt.tsv";
  write_clause_file(path, recs);
  CHECK(ingest_clause_file(path) == recs);
  std::filesystem::remove(path);
}

TEST_CASE("merge pairs: concatenation, truncation at boundaries, drop rule") {
  PropositionRecord two{"a b", {"rescue workers arrived", "soldiers arrived"}, RecordSource::kIngested};
  auto pairs = build_merge_pairs({two}, vocab());
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].source == "rescue workers arrived. soldiers arrived.");
  CHECK(pairs[0].target == "a b");

  // A long record: truncation keeps whole propositions only.
  PropositionRecord big{"target", {}, RecordSource::kIngested};
  for (int i = 0; i < 40; ++i) big.propositions.push_back("emergency crews distributed medical supplies in the capital");
  BuildReport rep;
  auto cut = build_merge_pairs({big}, vocab(), 60, &rep);
  REQUIRE(cut.size() == 1);
  CHECK(rep.truncated == 1);
  CHECK(vocab().encode(cut[0].source).size() <= 60);
  CHECK(cut[0].n_propositions >= 2);
  std::vector<std::string> kept(big.propositions.begin(), big.propositions.begin() + cut[0].n_propositions);
  CHECK(cut[0].source == join_propositions(kept));
  // One more proposition would not have fit.
  kept.push_back(big.propositions[0]);
  CHECK(vocab().encode(join_propositions(kept)).size() > 60);

  // Truncation leaving a single proposition drops the pair.
  auto dropped = build_merge_pairs({big}, vocab(), 12, &rep);
  CHECK(dropped.empty());
  CHECK(rep.dropped == 1);
}

TEST_CASE("scan flags pairs that break the data rules") {
  std::istringstream good("a. b.\tsentence\nc d. e f.\tother\n");
  CHECK(scan_merge_pairs(good, vocab()).ok());
  std::istringstream bad("only one.\tsentence\nno tab\n");
  auto rep = scan_merge_pairs(bad, vocab());
  CHECK(rep.too_few == 1);
  CHECK(rep.problems.size() == 2);
  std::istringstream longer("soldiers arrived. soldiers arrived. soldiers arrived.\tt\n");
  CHECK(scan_merge_pairs(longer, vocab(), 5).too_long == 1);
}

TEST_CASE("pairwise merge grouping") {
  std::vector<std::pair<std::string, std::string>> calls;
  MergeFn fake = [&](const std::string& a, const std::string& b) {
    calls.emplace_back(a, b);
    return "[" + a + "+" + b + "]";
  };
  CHECK(pairwise_merge({"s1", "s2", "s3", "s4"}, fake) == "[s1+s2] [s3+s4]");
  CHECK(pairwise_merge({"s1", "s2", "s3"}, fake) == "[s1+s2] s3");
  CHECK(pairwise_merge({"s1"}, fake) == "s1");
  CHECK(pairwise_merge({}, fake).empty());
  CHECK(calls.size() == 3);
}

TEST_CASE("model merge output respects the length bound") {
  model::ModelConfig c;
  c.d_model = 16;
  c.d_ff = 32;
  c.vocab_size = vocab().size();
  model::StyleTransferModel m(c, 3);
  m.parameter("out.b").mutable_data()[tokenizer::kEos] = -1e3;
  const std::string s = "soldiers rescued two children";
  auto ids = merge_ids(m, vocab(), s, s);
  CHECK(ids.size() == 2 * vocab().encode(s).size());
  CHECK_FALSE(model_merge_fn(m, vocab())(s, s).empty());
  CHECK(numerics::tape_size() == 0);
}
