#include "tweetnews/propositions/propositions.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "tweetnews/datakit/batch.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::propositions {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_period(std::string s) {
  s = trim(s);
  while (!s.empty() && s.back() == '.') s = trim(s.substr(0, s.size() - 1));
  return s;
}

// Core "subject relation object" of a clause.
std::string core(const Clause& c) { return join({c.subject, c.relation, c.object}); }

// One proposition carrying the first PP, then one per remaining PP.
void clause_propositions(const Clause& c, std::vector<std::string>& out) {
  if (c.pps.empty()) {
    out.push_back(core(c));
    return;
  }
  for (const auto& pp : c.pps) out.push_back(join({core(c), pp}));
}

std::string replace_word(const std::string& text, const std::string& word, const std::string& with) {
  std::istringstream in(text);
  std::vector<std::string> words;
  bool done = false;
  for (std::string w; in >> w;) {
    if (!done && w == word) {
      words.push_back(with);
      done = true;
    } else {
      words.push_back(w);
    }
  }
  return join(words);
}

struct Agent {
  const char* phrase;
  bool animate;
};

const Agent kAgents[] = {
    {"rescue workers", true}, {"soldiers", true},        {"volunteers", true},     {"local police", true},
    {"firefighters", true},   {"aid workers", true},     {"emergency crews", true}, {"doctors", true},
    {"the army", false},      {"the red cross", false},  {"a relief convoy", false}, {"a navy ship", false},
};

struct Action {
  const char* relation;
  std::vector<const char*> objects;
};

const std::vector<Action>& actions() {
  static const std::vector<Action> a = {
      {"evacuated", {"hundreds of residents", "stranded families", "the injured", "tourists"}},
      {"rescued", {"two children", "a fisherman", "trapped miners", "an elderly man"}},
      {"distributed", {"food and water", "blankets", "medical supplies", "tents"}},
      {"searched", {"the rubble", "collapsed homes", "the flooded fields"}},
      {"cleared", {"the main road", "fallen trees", "debris"}},
      {"treated", {"dozens of patients", "the wounded", "injured villagers"}},
  };
  return a;
}

const char* const kPlaces[] = {"in the coastal district", "near the river",     "in the capital",
                               "across the northern province", "in the hill villages", "at the main hospital"};
const char* const kTimes[] = {"on monday", "on tuesday", "overnight", "early on sunday", "on friday morning"};

struct RelTemplate {
  const char* relation;
  bool takes_time;  // else a place
};
const RelTemplate kRels[] = {{"arrived", true}, {"were deployed", false}, {"had travelled", true},
                             {"were stationed", false}};

struct Event {
  const char* subject;
  const char* relation;
  const char* object;
};
const Event kEvents[] = {
    {"a powerful earthquake", "struck", "the region"}, {"heavy rain", "flooded", "the town"},
    {"a cyclone", "hit", "the coast"},                 {"a fire", "destroyed", "the market"},
    {"a landslide", "buried", "the highway"},          {"the river", "burst", "its banks"},
    {"a storm", "damaged", "power lines"},
};

const std::vector<std::pair<std::string, std::string>>& synonyms() {
  static const std::vector<std::pair<std::string, std::string>> s = {
      {"evacuated", "moved"}, {"rescued", "saved"},    {"distributed", "delivered"}, {"searched", "combed"},
      {"cleared", "opened"},  {"treated", "helped"},   {"residents", "locals"},     {"children", "kids"},
      {"struck", "hit"},      {"destroyed", "razed"},  {"flooded", "swamped"},      {"blankets", "covers"},
      {"tents", "shelters"},  {"arrived", "came"},     {"soldiers", "troops"},      {"doctors", "medics"},
  };
  return s;
}

template <typename T, std::size_t N>
const T& pick(Rng& rng, const T (&arr)[N]) {
  return arr[rng.below(N)];
}

Clause random_action_clause(Rng& rng, const std::string& subject) {
  Clause c;
  c.subject = subject;
  const auto& act = actions()[rng.below(actions().size())];
  c.relation = act.relation;
  c.object = act.objects[rng.below(act.objects.size())];
  return c;
}

void add_pps(Rng& rng, Clause& c, std::size_t count) {
  // At most one place and one time, in that order.
  if (count >= 1) c.pps.push_back(pick(rng, kPlaces));
  if (count >= 2) c.pps.push_back(pick(rng, kTimes));
}

}  // namespace

std::string Clause::text() const {
  std::vector<std::string> parts{subject, relation, object};
  parts.insert(parts.end(), pps.begin(), pps.end());
  return join(parts);
}

std::string render_sentence(const SentenceAst& ast) {
  std::vector<std::string> parts{ast.main.subject};
  if (ast.rel) {
    Clause r = *ast.rel;
    r.subject.clear();
    parts.push_back(ast.rel_pronoun.value_or("who"));
    parts.push_back(r.text());
  }
  Clause rest = ast.main;
  rest.subject.clear();
  parts.push_back(rest.text());
  if (ast.after) {
    parts.push_back("after");
    parts.push_back(ast.after->text());
  }
  if (ast.conj) {
    parts.push_back("and");
    parts.push_back(ast.conj->text());
  }
  return join(parts);
}

std::vector<std::string> derive_propositions(const SentenceAst& ast) {
  std::vector<std::string> props;
  clause_propositions(ast.main, props);
  if (ast.rel) props.push_back(ast.rel->text());
  if (ast.after) {
    props.push_back(join({core(ast.main), "after", ast.after->text()}));
    props.push_back(ast.after->text());
  }
  if (ast.conj) clause_propositions(*ast.conj, props);
  if (ast.redundancy) {
    const auto& r = *ast.redundancy;
    props.push_back(replace_word(props.at(r.index), r.word, r.synonym));
  }
  return props;
}

const std::vector<std::string>& connective_words() {
  static const std::vector<std::string> w = {"who", "which", "after", "and"};
  return w;
}

std::vector<GeneratedRecord> generate_templated_ast(long n, std::uint64_t seed) {
  if (n <= 0) throw ConfigError("generate_templated: n must be positive");
  Rng rng(seed);
  std::vector<GeneratedRecord> out;
  for (long i = 0; i < n; ++i) {
    SentenceAst ast;
    const auto& agent = pick(rng, kAgents);
    ast.main = random_action_clause(rng, agent.phrase);
    add_pps(rng, ast.main, rng.below(3));
    if (rng.bernoulli(0.3)) {
      const auto& rt = pick(rng, kRels);
      Clause rel;
      rel.subject = agent.phrase;
      rel.relation = rt.relation;
      rel.pps.push_back(rt.takes_time ? pick(rng, kTimes) : pick(rng, kPlaces));
      ast.rel_pronoun = agent.animate ? "who" : "which";
      ast.rel = rel;
    }
    if (rng.bernoulli(0.4)) {
      const auto& ev = pick(rng, kEvents);
      Clause e{ev.subject, ev.relation, ev.object, {}};
      if (rng.bernoulli(0.3)) e.pps.push_back(pick(rng, kTimes));
      ast.after = e;
    }
    const bool plain = ast.main.pps.size() < 2 && !ast.rel && !ast.after;
    if (plain || rng.bernoulli(0.25)) {
      std::string subject = agent.phrase;
      while (subject == agent.phrase) subject = pick(rng, kAgents).phrase;
      ast.conj = random_action_clause(rng, subject);
      add_pps(rng, *ast.conj, rng.below(2));
    }
    auto props = derive_propositions(ast);
    if (rng.bernoulli(0.3)) {
      // Candidate (proposition, word) pairs with a known synonym.
      std::vector<SentenceAst::Redundancy> options;
      for (std::size_t p = 0; p < props.size(); ++p) {
        std::istringstream words(props[p]);
        for (std::string w; words >> w;) {
          for (const auto& [word, syn] : synonyms()) {
            if (w == word) options.push_back({p, word, syn});
          }
        }
      }
      if (!options.empty()) {
        ast.redundancy = options[rng.below(options.size())];
        props = derive_propositions(ast);
      }
    }
    out.push_back({{render_sentence(ast), std::move(props), RecordSource::kGenerated}, std::move(ast)});
  }
  return out;
}

std::vector<PropositionRecord> generate_templated(long n, std::uint64_t seed) {
  std::vector<PropositionRecord> out;
  for (auto& g : generate_templated_ast(n, seed)) out.push_back(std::move(g.record));
  return out;
}

std::vector<PropositionRecord> parse_clause_stream(std::istream& in, const std::string& origin,
                                                   IngestReport* report) {
  IngestReport local;
  std::vector<PropositionRecord> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++local.lines;
    const auto where = origin + ":" + std::to_string(n) + ": ";
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (auto tab = line.find('\t'); tab != std::string::npos; tab = line.find('\t', start)) {
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    if (fields.size() < 2) {
      local.malformed.push_back(where + "no tab-separated propositions");
      continue;
    }
    PropositionRecord rec;
    rec.sentence = trim(fields[0]);
    if (rec.sentence.empty()) {
      local.malformed.push_back(where + "empty sentence");
      continue;
    }
    bool bad = false;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto p = strip_period(fields[i]);
      if (p.empty()) {
        local.malformed.push_back(where + "empty proposition in field " + std::to_string(i + 1));
        bad = true;
        break;
      }
      rec.propositions.push_back(std::move(p));
    }
    if (bad) continue;
    if (rec.propositions.size() < 2) {
      ++local.dropped_short;
      continue;
    }
    out.push_back(std::move(rec));
  }
  local.records = out.size();
  if (report) *report = local;
  return out;
}

std::vector<PropositionRecord> ingest_clause_file(const std::filesystem::path& path, IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open clause file " + path.string());
  return parse_clause_stream(in, path.string(), report);
}

void write_clause_file(const std::filesystem::path& path, const std::vector<PropositionRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) {
    out << r.sentence;
    for (const auto& p : r.propositions) out << '\t' << p;
    out << '\n';
  }
}

std::string join_propositions(std::span<const std::string> props) {
  std::string out;
  for (const auto& p : props) {
    if (!out.empty()) out += ' ';
    out += strip_period(p);
    out += '.';
  }
  return out;
}

std::vector<MergePair> build_merge_pairs(const std::vector<PropositionRecord>& records, const tokenizer::Vocab& vocab,
                                         std::size_t max_tokens, BuildReport* report) {
  BuildReport local;
  std::vector<MergePair> out;
  for (const auto& r : records) {
    ++local.records;
    std::size_t k = r.propositions.size();
    std::string source;
    for (; k >= 2; --k) {
      source = join_propositions(std::span(r.propositions).first(k));
      if (vocab.encode(source).size() <= max_tokens) break;
    }
    if (k < 2) {
      ++local.dropped;
      continue;
    }
    if (k < r.propositions.size()) ++local.truncated;
    out.push_back({std::move(source), r.sentence, k});
    ++local.emitted;
  }
  if (report) *report = local;
  return out;
}

ScanReport scan_merge_pairs(std::istream& in, const tokenizer::Vocab& vocab, std::size_t max_tokens) {
  ScanReport rep;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    ++rep.pairs;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      rep.problems.push_back("line " + std::to_string(n) + ": expected source<TAB>target");
      continue;
    }
    const auto source = line.substr(0, tab);
    if (trim(line.substr(tab + 1)).empty()) rep.problems.push_back("line " + std::to_string(n) + ": empty target");
    // Segments are the ". "-separated propositions of P(y).
    std::size_t segments = 0;
    std::size_t start = 0;
    while (start < source.size()) {
      auto end = source.find(". ", start);
      auto seg = strip_period(source.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (!seg.empty()) ++segments;
      if (end == std::string::npos) break;
      start = end + 2;
    }
    if (segments < 2) {
      ++rep.too_few;
      rep.problems.push_back("line " + std::to_string(n) + ": " + std::to_string(segments) + " proposition(s)");
    }
    const auto len = vocab.encode(source).size();
    if (len > max_tokens) {
      ++rep.too_long;
      rep.problems.push_back("line " + std::to_string(n) + ": source has " + std::to_string(len) + " tokens");
    }
  }
  return rep;
}

std::string pairwise_merge(const std::vector<std::string>& sentences, const MergeFn& merge) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  for (; i + 1 < sentences.size(); i += 2) parts.push_back(merge(sentences[i], sentences[i + 1]));
  if (i < sentences.size()) parts.push_back(sentences[i]);
  return join(parts);
}

std::vector<tokenizer::TokenId> merge_ids(model::StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                          const std::string& a, const std::string& b) {
  const std::string pair[] = {a, b};
  auto ids = datakit::frame(vocab.encode(join_propositions(pair)));
  if (ids.size() > model.config().max_len) {
    throw DataError("merge: source of " + std::to_string(ids.size()) + " tokens exceeds max_len");
  }
  const std::size_t budget = std::max<std::size_t>(1, vocab.encode(a).size() + vocab.encode(b).size());
  auto batch = datakit::pad_batch({ids}, Style::kProposition);
  numerics::NoGradGuard no_grad;
  model.set_training(false);
  auto z = model.encode(batch, Style::kProposition);
  return model.generate(z, Style::kSentence, budget, model::DecodeMode::kGreedy).front();
}

MergeFn model_merge_fn(model::StyleTransferModel& model, const tokenizer::Vocab& vocab) {
  return [&model, &vocab](const std::string& a, const std::string& b) {
    return vocab.decode(merge_ids(model, vocab, a, b));
  };
}

}  // namespace tweetnews::propositions
