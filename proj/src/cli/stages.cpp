#include "tweetnews/cli/stages.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "tweetnews/datakit/batch.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/eval/metrics.hpp"
#include "tweetnews/numerics/ops.hpp"

namespace tweetnews::cli {

namespace fs = std::filesystem;
using model::StyleTransferModel;

RunDir::RunDir(fs::path dir, const PipelineConfig& cfg) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw DataError("cannot create " + dir_.string() + ": " + ec.message());
  std::ofstream(dir_ / "config.txt") << serialize_config(cfg);
  std::ofstream(dir_ / "versions.txt") << versions_stamp();
  metrics_.open(dir_ / "metrics.jsonl", std::ios::trunc);
  if (!metrics_) throw DataError("cannot write " + (dir_ / "metrics.jsonl").string());
}

void RunDir::log(const objectives::StepRecord& r, const std::string& stage) {
  auto line = objectives::to_json_line(r);
  if (!stage.empty()) line.insert(1, "\"stage\":\"" + stage + "\",");
  metrics_ << line << '\n';
  metrics_.flush();
}

std::string versions_stamp() {
  std::string s = "tweetnews " + std::string(kVersion) + "\n";
  s += "checkpoint sfck 1\n";
  s += "eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
       std::to_string(EIGEN_MINOR_VERSION) + "\n";
#if defined(__clang__)
  s += "compiler clang " __clang_version__ "\n";
#elif defined(__GNUC__)
  s += "compiler gcc " __VERSION__ "\n";
#endif
  s += "cxx " + std::to_string(__cplusplus) + "\n";
  return s;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(std::move(line));
  }
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

std::vector<std::vector<std::string>> read_groups(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::vector<std::string>> groups(1);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (!groups.back().empty()) groups.emplace_back();
    } else {
      groups.back().push_back(std::move(line));
    }
  }
  if (groups.back().empty()) groups.pop_back();
  if (groups.empty()) throw DataError(path.string() + " contains no tweet groups");
  return groups;
}

tokenizer::Vocab train_vocab(const PipelineConfig& cfg, const std::vector<std::string>& texts) {
  std::string corpus;
  for (const auto& t : texts) corpus += t + "\n";
  if (corpus.empty()) throw DataError("train-bpe: empty corpus");
  return tokenizer::Vocab::train(corpus, cfg.vocab_size);
}

model::ModelConfig model_config(const PipelineConfig& cfg, std::size_t vocab_size) {
  auto m = cfg.model;
  m.vocab_size = vocab_size;
  m.validate();
  return m;
}

StyleTransferModel load_model(const fs::path& path, const tokenizer::Vocab& vocab) {
  auto model = model::model_from_checkpoint(model::load_checkpoint(path));
  if (model.config().vocab_size != vocab.size()) {
    throw DataError(path.string() + ": checkpoint vocabulary has " + std::to_string(model.config().vocab_size) +
                    " entries, vocab file has " + std::to_string(vocab.size()));
  }
  return model;
}

corruptor::Corruptor make_corruptor(const PipelineConfig& cfg, const std::vector<std::string>& tweets) {
  auto spec = cfg.corrupt;
  spec.hashtag_pool = corruptor::build_hashtag_pool(tweets, cfg.hashtag_pool);
  auto lexicon = cfg.lexicon.empty() ? corruptor::default_lexicon() : corruptor::load_tsv_map(cfg.lexicon);
  auto gazetteer = cfg.gazetteer.empty() ? corruptor::default_gazetteer() : corruptor::load_lines(cfg.gazetteer);
  return corruptor::Corruptor(spec, std::move(lexicon), std::move(gazetteer));
}

namespace {

numerics::AdamConfig adam(double lr) {
  numerics::AdamConfig c;
  c.learning_rate = lr;
  return c;
}

StyleTransferModel initial_model(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                 std::optional<StyleTransferModel>& init, const char* tag) {
  if (init) {
    if (init->config().vocab_size != vocab.size()) throw DataError("initial checkpoint does not match the vocabulary");
    return std::move(*init);
  }
  return StyleTransferModel(model_config(cfg, vocab.size()), derive_seed(cfg.seed, tag));
}

objectives::ScheduleHooks logging_hooks(RunDir* run, const std::string& stage) {
  objectives::ScheduleHooks hooks;
  if (run) hooks.on_step = [run, stage](const objectives::StepRecord& r) { run->log(r, stage); };
  return hooks;
}

}  // namespace

StyleTransferModel pretrain_mlm(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                const std::vector<std::string>& tweets, const std::vector<std::string>& news,
                                std::optional<StyleTransferModel> init, RunDir* run) {
  auto model = initial_model(cfg, vocab, init, "mlm-init");
  model.set_training(true);
  const auto l1 = datakit::make_streams(tweets, vocab, cfg.mlm_stream_len);
  const auto l2 = datakit::make_streams(news, vocab, cfg.mlm_stream_len);
  objectives::Trainer trainer(model, nullptr, adam(cfg.mlm_lr), adam(cfg.mlm_lr));
  objectives::run_mlm(trainer, l1, l2, cfg.mlm_steps, cfg.mlm_batch_size, cfg.mlm, derive_seed(cfg.seed, "mlm"),
                      logging_hooks(run, ""));
  model.init_decoder_from_encoder();
  if (run) model::save_model(run->file("checkpoint.sfck"), model);
  return model;
}

StyleModels train_style(const PipelineConfig& cfg, const tokenizer::Vocab& vocab, const std::vector<std::string>& tweets,
                        const std::vector<std::string>& news, std::optional<StyleTransferModel> init, RunDir* run) {
  StyleModels out{initial_model(cfg, vocab, init, "style-init"), std::nullopt};
  if (cfg.dis) out.disc.emplace(cfg.model.d_model, cfg.disc_hidden, derive_seed(cfg.seed, "disc-init"));
  out.model.set_training(true);
  model::Discriminator* disc = out.disc ? &*out.disc : nullptr;
  objectives::Trainer trainer(out.model, disc, adam(cfg.style_lr), adam(cfg.disc_lr));
  std::optional<corruptor::Corruptor> corr;
  if (cfg.syn) corr.emplace(make_corruptor(cfg, tweets));
  objectives::TrainingData data{tweets, news, {}};
  auto hooks = logging_hooks(run, "");
  if (run) {
    hooks.on_checkpoint = [&](std::size_t cycle) {
      model::save_model(run->file("checkpoint-cycle-" + std::to_string(cycle) + ".sfck"), out.model, disc);
    };
  }
  objectives::run_schedule(cfg.style_schedule(), trainer, vocab, data, corr ? &*corr : nullptr, hooks);
  if (run) model::save_model(run->file("checkpoint.sfck"), out.model, disc);
  return out;
}

std::vector<propositions::MergePair> merge_corpus(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                                  propositions::BuildReport* report) {
  std::vector<propositions::PropositionRecord> records;
  if (!cfg.clauses.empty()) {
    propositions::IngestReport ingest;
    records = propositions::ingest_clause_file(cfg.clauses, &ingest);
    if (!ingest.malformed.empty()) throw DataError(ingest.malformed.front());
  }
  if (cfg.merge_templated > 0) {
    auto gen = propositions::generate_templated(static_cast<long>(cfg.merge_templated), derive_seed(cfg.seed, "templated"));
    records.insert(records.end(), gen.begin(), gen.end());
  }
  if (records.empty()) throw DataError("merge corpus is empty (no clause file and merge.templated = 0)");
  return propositions::build_merge_pairs(records, vocab, cfg.max_source_tokens, report);
}

void write_merge_pairs(const fs::path& path, const std::vector<propositions::MergePair>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& p : pairs) out << p.source << '\t' << p.target << '\n';
}

std::vector<std::pair<std::string, std::string>> read_merge_pairs(const fs::path& path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t n = 0;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": expected source<TAB>target");
    }
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (out.empty()) throw DataError(path.string() + " holds no merge pairs");
  return out;
}

StyleTransferModel train_merge(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                               const std::vector<std::pair<std::string, std::string>>& pairs,
                               std::optional<StyleTransferModel> init, RunDir* run) {
  auto model = initial_model(cfg, vocab, init, "merge-init");
  model.set_training(true);
  objectives::Trainer trainer(model, nullptr, adam(cfg.merge_lr), adam(cfg.merge_lr));
  objectives::ScheduleSpec spec;
  spec.objectives = {objectives::Objective::kMerge};
  spec.batch_size = cfg.merge_batch_size;
  spec.cycles = cfg.merge_cycles;
  spec.seed = derive_seed(cfg.seed, "merge");
  spec.checkpoint_every = cfg.checkpoint_every;
  spec.noise = cfg.noise;
  objectives::TrainingData data{{}, {}, pairs};
  auto hooks = logging_hooks(run, "");
  if (run) {
    hooks.on_checkpoint = [&](std::size_t cycle) {
      model::save_model(run->file("checkpoint-cycle-" + std::to_string(cycle) + ".sfck"), model);
    };
  }
  objectives::run_schedule(spec, trainer, vocab, data, nullptr, hooks);
  if (run) model::save_model(run->file("checkpoint.sfck"), model);
  return model;
}

std::vector<std::string> transfer(StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                  const std::vector<std::string>& tweets) {
  numerics::NoGradGuard no_grad;
  model.set_training(false);
  const std::size_t max_len = model.config().max_len;
  std::vector<std::string> out;
  constexpr std::size_t kChunk = 8;
  for (std::size_t start = 0; start < tweets.size(); start += kChunk) {
    std::vector<std::vector<tokenizer::TokenId>> rows;
    std::vector<std::size_t> budget;
    for (std::size_t i = start; i < std::min(tweets.size(), start + kChunk); ++i) {
      auto ids = vocab.encode(tweets[i]);
      if (ids.empty()) throw DataError("transfer: line " + std::to_string(i + 1) + " encodes to no tokens");
      if (ids.size() + 2 > max_len) {
        throw DataError("transfer: line " + std::to_string(i + 1) + " exceeds max_len " + std::to_string(max_len));
      }
      budget.push_back(std::clamp<std::size_t>(2 * ids.size(), 1, max_len - 2));
      rows.push_back(datakit::frame(ids));
    }
    auto z = model.encode(datakit::pad_batch(rows, Style::kTweet), Style::kTweet);
    for (const auto& gen : model.generate(z, Style::kNews, budget, model::DecodeMode::kGreedy)) {
      out.push_back(vocab.decode(gen));
    }
  }
  return out;
}

std::vector<std::string> merge_groups(StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                      const std::vector<std::vector<std::string>>& groups) {
  const auto fn = propositions::model_merge_fn(model, vocab);
  std::vector<std::string> out;
  for (const auto& g : groups) out.push_back(propositions::pairwise_merge(g, fn));
  return out;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : " ") + p;
  return s;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const fs::path& groups_path,
                            const std::optional<fs::path>& reference, const fs::path& out) {
  cfg.validate();
  if (!cfg.pipeline_style && !cfg.pipeline_merge) throw ConfigError("pipeline: enable pipeline.style or pipeline.merge");
  const auto groups = read_groups(groups_path);
  std::optional<std::vector<std::string>> refs;
  if (reference) {
    refs = read_lines(*reference);
    if (refs->size() != groups.size()) {
      throw DataError("pipeline: " + std::to_string(groups.size()) + " groups but " + std::to_string(refs->size()) +
                      " reference paragraphs");
    }
  }
  const auto tweets = read_lines(cfg.tweets);
  const auto news = read_lines(cfg.news);

  RunDir run(out, cfg);
  // BPE covers both styles plus the merge corpus text (sources are built
  // from the same words as the targets).
  std::vector<std::string> bpe_text = tweets;
  bpe_text.insert(bpe_text.end(), news.begin(), news.end());
  std::vector<std::pair<std::string, std::string>> merge_pairs;
  if (cfg.pipeline_merge) {
    // Pairs are built once the vocabulary exists; the raw text joins the
    // BPE corpus first.
    std::vector<propositions::PropositionRecord> recs;
    if (!cfg.clauses.empty()) recs = propositions::ingest_clause_file(cfg.clauses);
    if (cfg.merge_templated > 0) {
      auto gen = propositions::generate_templated(static_cast<long>(cfg.merge_templated), derive_seed(cfg.seed, "templated"));
      recs.insert(recs.end(), gen.begin(), gen.end());
    }
    for (const auto& r : recs) {
      bpe_text.push_back(r.sentence);
      bpe_text.insert(bpe_text.end(), r.propositions.begin(), r.propositions.end());
    }
  }
  const auto vocab = train_vocab(cfg, bpe_text);
  vocab.save(run.file("vocab.txt"));

  RunDir mlm_run(out / "mlm", cfg);
  auto mlm = pretrain_mlm(cfg, vocab, tweets, news, std::nullopt, &mlm_run);
  auto fresh_from_mlm = [&] { return load_model(mlm_run.file("checkpoint.sfck"), vocab); };

  std::vector<std::vector<std::string>> stage_input = groups;
  if (cfg.pipeline_style) {
    RunDir style_run(out / "style", cfg);
    auto style = train_style(cfg, vocab, tweets, news, std::move(mlm), &style_run);
    std::vector<std::string> flat;
    if (cfg.concat_input) {
      for (const auto& g : groups) flat.push_back(join(g));
      const auto transferred = transfer(style.model, vocab, flat);
      stage_input.clear();
      for (const auto& t : transferred) stage_input.push_back({t});
    } else {
      for (const auto& g : groups) flat.insert(flat.end(), g.begin(), g.end());
      const auto transferred = transfer(style.model, vocab, flat);
      std::size_t k = 0;
      for (auto& g : stage_input) {
        for (auto& s : g) s = transferred[k++];
      }
    }
    std::vector<std::string> lines;
    for (const auto& g : stage_input) lines.push_back(join(g));
    write_lines(run.file("transferred.txt"), lines);
  }

  PipelineResult result;
  if (cfg.pipeline_merge) {
    RunDir merge_run(out / "merge", cfg);
    const auto pairs = merge_corpus(cfg, vocab);
    write_merge_pairs(merge_run.file("pairs.tsv"), pairs);
    for (const auto& p : pairs) merge_pairs.emplace_back(p.source, p.target);
    auto merger = train_merge(cfg, vocab, merge_pairs, fresh_from_mlm(), &merge_run);
    result.paragraphs = merge_groups(merger, vocab, stage_input);
  } else {
    for (const auto& g : stage_input) result.paragraphs.push_back(join(g));
  }
  write_lines(run.file("paragraphs.txt"), result.paragraphs);

  // Top-level metrics: every stage's log, tagged with its stage.
  {
    std::ofstream all(run.file("metrics.jsonl"), std::ios::trunc);
    for (const char* stage : {"mlm", "style", "merge"}) {
      std::ifstream in(out / stage / "metrics.jsonl");
      for (std::string line; std::getline(in, line);) {
        all << line.insert(1, std::string("\"stage\":\"") + stage + "\",") << '\n';
      }
    }
  }
  if (refs) {
    result.bleu = eval::format_bleu(eval::bleu(result.paragraphs, *refs));
    std::ofstream(run.file("bleu.txt")) << *result.bleu << '\n';
  }
  return result;
}

}  // namespace tweetnews::cli
