// tweetnews: command-line front end for every pipeline stage.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "tweetnews/cli/stages.hpp"
#include "tweetnews/datakit/kmeans.hpp"
#include "tweetnews/datakit/tfidf.hpp"
#include "tweetnews/datakit/toy_corpus.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/eval/metrics.hpp"

namespace fs = std::filesystem;
using namespace tweetnews;
using json = nlohmann::json;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", path, "config file (key = value lines)")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "override one config key, key=value");
  }

  cli::PipelineConfig load() const {
    auto cfg = path.empty() ? cli::PipelineConfig{} : cli::load_config(path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      cli::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw DataError(path + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

std::optional<model::StyleTransferModel> maybe_init(const std::string& path, const tokenizer::Vocab& vocab) {
  if (path.empty()) return std::nullopt;
  return cli::load_model(path, vocab);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

json stats_json(const corruptor::CorruptionStats& s) {
  return {{"sentences", s.sentences}, {"words", s.words},
          {"spelled", s.spelled},     {"entities", s.entities},
          {"entities_hashtagged", s.entities_hashtagged}, {"injected", s.injected},
          {"synonyms", s.synonyms},   {"function_drops", s.function_drops}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tweetnews: tweets to news-style paragraphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kVersion);

  // train-bpe
  ConfigArgs bpe_cfg;
  std::vector<std::string> bpe_inputs;
  std::string bpe_out;
  auto* bpe = app.add_subcommand("train-bpe", "learn a BPE vocabulary");
  bpe_cfg.add_to(bpe);
  bpe->add_option("-i,--input", bpe_inputs, "corpus files (one sentence per line)")->required()->check(CLI::ExistingFile);
  bpe->add_option("-o,--out", bpe_out, "vocabulary file")->required();

  // pretrain-mlm
  ConfigArgs mlm_cfg;
  std::string mlm_vocab, mlm_out, mlm_init;
  auto* mlm = app.add_subcommand("pretrain-mlm", "masked-LM fine-tuning on tweets and news");
  mlm_cfg.add_to(mlm);
  mlm->add_option("--vocab", mlm_vocab)->required()->check(CLI::ExistingFile);
  mlm->add_option("--init", mlm_init, "initial checkpoint")->check(CLI::ExistingFile);
  mlm->add_option("-o,--out", mlm_out, "run directory")->required();

  // corrupt
  ConfigArgs cor_cfg;
  std::string cor_in, cor_out, cor_stats;
  std::uint64_t cor_seed = 0;
  auto* cor = app.add_subcommand("corrupt", "apply the synthetic tweet corruption H to news sentences");
  cor_cfg.add_to(cor);
  cor->add_option("-i,--input", cor_in)->required()->check(CLI::ExistingFile);
  cor->add_option("-o,--output", cor_out)->required();
  cor->add_option("--seed", cor_seed);
  cor->add_option("--stats", cor_stats, "write selection counts as JSON");

  // build-merge-data
  ConfigArgs bmd_cfg;
  std::string bmd_vocab, bmd_out;
  auto* bmd = app.add_subcommand("build-merge-data", "build (P(y), y) merge pairs");
  bmd_cfg.add_to(bmd);
  bmd->add_option("--vocab", bmd_vocab)->required()->check(CLI::ExistingFile);
  bmd->add_option("-o,--out", bmd_out, "pairs file, source<TAB>target")->required();

  // scan-merge-data
  std::string scan_vocab, scan_in;
  std::size_t scan_max = propositions::kMaxSourceTokens;
  auto* scan = app.add_subcommand("scan-merge-data", "check merge pairs against the data rules");
  scan->add_option("--vocab", scan_vocab)->required()->check(CLI::ExistingFile);
  scan->add_option("-i,--input", scan_in)->required()->check(CLI::ExistingFile);
  scan->add_option("--max-tokens", scan_max);

  // filter-domain
  ConfigArgs fd_cfg;
  std::string fd_in, fd_out, fd_refs, fd_keywords;
  std::optional<double> fd_threshold;
  auto* fd = app.add_subcommand("filter-domain", "keep in-domain sentences");
  fd_cfg.add_to(fd);
  fd->add_option("-i,--input", fd_in)->required()->check(CLI::ExistingFile);
  fd->add_option("-o,--output", fd_out)->required();
  auto* fd_ref_opt = fd->add_option("--references", fd_refs, "TF-IDF cosine against these sentences")->check(CLI::ExistingFile);
  fd->add_option("--keywords", fd_keywords, "keyword list (default: built-in disaster words)")
      ->check(CLI::ExistingFile)
      ->excludes(fd_ref_opt);
  fd->add_option("--threshold", fd_threshold);

  // cluster-select
  ConfigArgs cs_cfg;
  std::string cs_in, cs_out, cs_assign;
  std::optional<std::size_t> cs_k;
  auto* cs = app.add_subcommand("cluster-select", "k-means over TF-IDF vectors, one representative per cluster");
  cs_cfg.add_to(cs);
  cs->add_option("-i,--input", cs_in)->required()->check(CLI::ExistingFile);
  cs->add_option("-o,--output", cs_out)->required();
  cs->add_option("--assignments", cs_assign, "index<TAB>cluster file");
  cs->add_option("-k", cs_k);

  // train-style
  ConfigArgs ts_cfg;
  std::string ts_vocab, ts_out, ts_init;
  bool ts_dis = false, ts_syn = false;
  auto* ts = app.add_subcommand("train-style", "style transfer training (L_rec + L_bt, optional L_D/L_adv and L_syn)");
  ts_cfg.add_to(ts);
  ts->add_option("--vocab", ts_vocab)->required()->check(CLI::ExistingFile);
  ts->add_option("--init", ts_init, "initial checkpoint (e.g. from pretrain-mlm)")->check(CLI::ExistingFile);
  ts->add_option("-o,--out", ts_out)->required();
  ts->add_flag("--dis", ts_dis, "enable the discriminator and adversarial objectives");
  ts->add_flag("--syn", ts_syn, "enable synthetic-parallel training");

  // train-merge
  ConfigArgs tm_cfg;
  std::string tm_vocab, tm_pairs, tm_out, tm_init;
  auto* tm = app.add_subcommand("train-merge", "train the proposition merge model");
  tm_cfg.add_to(tm);
  tm->add_option("--vocab", tm_vocab)->required()->check(CLI::ExistingFile);
  tm->add_option("--pairs", tm_pairs)->required()->check(CLI::ExistingFile);
  tm->add_option("--init", tm_init)->check(CLI::ExistingFile);
  tm->add_option("-o,--out", tm_out)->required();

  // transfer
  std::string tr_ckpt, tr_vocab, tr_in, tr_out;
  auto* tr = app.add_subcommand("transfer", "tweets to news-style sentences");
  tr->add_option("--checkpoint", tr_ckpt)->required()->check(CLI::ExistingFile);
  tr->add_option("--vocab", tr_vocab)->required()->check(CLI::ExistingFile);
  tr->add_option("-i,--input", tr_in)->required()->check(CLI::ExistingFile);
  tr->add_option("-o,--output", tr_out)->required();

  // merge
  std::string mg_ckpt, mg_vocab, mg_in, mg_out;
  auto* mg = app.add_subcommand("merge", "merge sentence groups into paragraphs, two at a time");
  mg->add_option("--checkpoint", mg_ckpt)->required()->check(CLI::ExistingFile);
  mg->add_option("--vocab", mg_vocab)->required()->check(CLI::ExistingFile);
  mg->add_option("-i,--input", mg_in, "groups separated by blank lines")->required()->check(CLI::ExistingFile);
  mg->add_option("-o,--output", mg_out)->required();

  // pipeline
  ConfigArgs pl_cfg;
  std::string pl_groups, pl_ref, pl_out;
  auto* pl = app.add_subcommand("pipeline", "train every stage, then transfer and merge tweet groups");
  pl_cfg.add_to(pl);
  pl->add_option("-g,--groups", pl_groups, "tweet groups separated by blank lines")->required()->check(CLI::ExistingFile);
  pl->add_option("--reference", pl_ref, "one reference paragraph per group")->check(CLI::ExistingFile);
  pl->add_option("-o,--out", pl_out)->required();

  // eval-bleu
  std::string eb_hyp, eb_ref;
  auto* eb = app.add_subcommand("eval-bleu", "multi-bleu compatible corpus BLEU");
  eb->add_option("hypothesis", eb_hyp)->required()->check(CLI::ExistingFile);
  eb->add_option("reference", eb_ref)->required()->check(CLI::ExistingFile);

  // eval-kappa
  std::string ek_in;
  auto* ek = app.add_subcommand("eval-kappa", "Fleiss' kappa of a rating-count matrix (one subject per line)");
  ek->add_option("matrix", ek_in)->required()->check(CLI::ExistingFile);

  // eval-ttest
  std::string et_a, et_b;
  auto* et = app.add_subcommand("eval-ttest", "Welch's t-test between two samples");
  et->add_option("a", et_a)->required()->check(CLI::ExistingFile);
  et->add_option("b", et_b)->required()->check(CLI::ExistingFile);

  // make-toy-data
  std::string td_out;
  std::uint64_t td_seed = 0;
  auto* td = app.add_subcommand("make-toy-data", "write the synthetic desk corpus");
  td->add_option("-o,--out", td_out)->required();
  td->add_option("--seed", td_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*bpe) {
      const auto cfg = bpe_cfg.load();
      std::vector<std::string> lines;
      for (const auto& f : bpe_inputs) {
        auto l = cli::read_lines(f);
        lines.insert(lines.end(), l.begin(), l.end());
      }
      const auto vocab = cli::train_vocab(cfg, lines);
      vocab.save(bpe_out);
      std::printf("vocabulary of %zu tokens written to %s\n", vocab.size(), bpe_out.c_str());
    } else if (*mlm) {
      const auto cfg = mlm_cfg.load();
      const auto vocab = tokenizer::Vocab::load(mlm_vocab);
      cli::RunDir run(mlm_out, cfg);
      cli::pretrain_mlm(cfg, vocab, cli::read_lines(cfg.tweets), cli::read_lines(cfg.news), maybe_init(mlm_init, vocab), &run);
    } else if (*cor) {
      const auto cfg = cor_cfg.load();
      const auto corr = cli::make_corruptor(cfg, cli::read_lines(cfg.tweets));
      const auto lines = cli::read_lines(cor_in);
      corruptor::CorruptionStats stats;
      std::vector<std::string> out;
      for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(corr.corrupt(lines[i], derive_seed(cor_seed, i), &stats));
      cli::write_lines(cor_out, out);
      if (!cor_stats.empty()) std::ofstream(cor_stats) << stats_json(stats).dump(2) << '\n';
    } else if (*bmd) {
      const auto cfg = bmd_cfg.load();
      const auto vocab = tokenizer::Vocab::load(bmd_vocab);
      propositions::BuildReport report;
      const auto pairs = cli::merge_corpus(cfg, vocab, &report);
      cli::write_merge_pairs(bmd_out, pairs);
      print_json({{"records", report.records}, {"emitted", report.emitted}, {"truncated", report.truncated},
                  {"dropped", report.dropped}});
    } else if (*scan) {
      const auto vocab = tokenizer::Vocab::load(scan_vocab);
      std::ifstream in(scan_in);
      const auto r = propositions::scan_merge_pairs(in, vocab, scan_max);
      print_json({{"pairs", r.pairs}, {"too_few", r.too_few}, {"too_long", r.too_long}, {"problems", r.problems},
                  {"ok", r.ok()}});
      return r.ok() ? 0 : 2;
    } else if (*fd) {
      const auto cfg = fd_cfg.load();
      const auto docs = cli::read_lines(fd_in);
      std::vector<std::size_t> kept;
      if (!fd_refs.empty()) {
        kept = datakit::filter_by_similarity(docs, cli::read_lines(fd_refs), fd_threshold.value_or(cfg.filter_threshold));
      } else {
        const auto kw_path = fd_keywords.empty() ? cfg.keywords : fd_keywords;
        kept = datakit::keyword_filter(docs, kw_path.empty() ? datakit::default_disaster_keywords() : cli::read_lines(kw_path));
      }
      std::vector<std::string> out;
      for (auto i : kept) out.push_back(docs[i]);
      cli::write_lines(fd_out, out);
      std::printf("kept %zu of %zu\n", out.size(), docs.size());
    } else if (*cs) {
      const auto cfg = cs_cfg.load();
      const auto docs = cli::read_lines(cs_in);
      const auto tfidf = datakit::TfidfModel::fit(docs);
      std::vector<datakit::Point> points;
      for (const auto& d : docs) points.push_back(tfidf.transform_dense(d));
      const auto result = datakit::kmeans(points, cs_k.value_or(cfg.cluster_k), derive_seed(cfg.seed, "kmeans"),
                                          cfg.cluster_max_iter);
      cli::write_lines(cs_out, datakit::representative_texts(result, points, docs));
      if (!cs_assign.empty()) {
        std::ofstream a(cs_assign);
        for (std::size_t i = 0; i < docs.size(); ++i) a << i << '\t' << result.assignment[i] << '\n';
      }
    } else if (*ts) {
      auto cfg = ts_cfg.load();
      cfg.dis = ts_dis;
      cfg.syn = ts_syn;
      const auto vocab = tokenizer::Vocab::load(ts_vocab);
      cli::RunDir run(ts_out, cfg);
      cli::train_style(cfg, vocab, cli::read_lines(cfg.tweets), cli::read_lines(cfg.news), maybe_init(ts_init, vocab), &run);
    } else if (*tm) {
      const auto cfg = tm_cfg.load();
      const auto vocab = tokenizer::Vocab::load(tm_vocab);
      cli::RunDir run(tm_out, cfg);
      cli::train_merge(cfg, vocab, cli::read_merge_pairs(tm_pairs), maybe_init(tm_init, vocab), &run);
    } else if (*tr) {
      const auto vocab = tokenizer::Vocab::load(tr_vocab);
      auto m = cli::load_model(tr_ckpt, vocab);
      cli::write_lines(tr_out, cli::transfer(m, vocab, cli::read_lines(tr_in)));
    } else if (*mg) {
      const auto vocab = tokenizer::Vocab::load(mg_vocab);
      auto m = cli::load_model(mg_ckpt, vocab);
      cli::write_lines(mg_out, cli::merge_groups(m, vocab, cli::read_groups(mg_in)));
    } else if (*pl) {
      const auto cfg = pl_cfg.load();
      std::optional<fs::path> ref;
      if (!pl_ref.empty()) ref = pl_ref;
      const auto result = cli::run_pipeline(cfg, pl_groups, ref, pl_out);
      for (const auto& p : result.paragraphs) std::printf("%s\n", p.c_str());
      if (result.bleu) std::printf("%s\n", result.bleu->c_str());
    } else if (*eb) {
      std::printf("%s\n", eval::format_bleu(eval::bleu_files(eb_hyp, eb_ref)).c_str());
    } else if (*ek) {
      eval::RatingMatrix m;
      for (const auto& line : cli::read_lines(ek_in)) {
        std::istringstream in(line);
        std::vector<std::size_t> row;
        for (long v; in >> v;) {
          if (v < 0) throw DataError("eval-kappa: negative count");
          row.push_back(static_cast<std::size_t>(v));
        }
        if (!in.eof()) throw DataError("eval-kappa: non-numeric entry in '" + line + "'");
        m.counts.push_back(row);
      }
      std::printf("kappa = %.10f\n", eval::fleiss_kappa(m));
    } else if (*et) {
      const auto r = eval::welch_t(read_numbers(et_a), read_numbers(et_b));
      std::printf("t = %.10f, df = %.10f, p = %.10g\n", r.t, r.df, r.p);
    } else if (*td) {
      const auto c = datakit::generate_toy_corpus({}, td_seed);
      fs::create_directories(td_out);
      const fs::path dir(td_out);
      cli::write_lines(dir / "tweets.txt", c.tweets);
      cli::write_lines(dir / "news.txt", c.news);
      cli::write_lines(dir / "off_domain.txt", c.off_domain);
      std::vector<std::string> pt, pn;
      for (const auto& [t, n] : c.parallel) {
        pt.push_back(t);
        pn.push_back(n);
      }
      cli::write_lines(dir / "parallel_tweets.txt", pt);
      cli::write_lines(dir / "parallel_news.txt", pn);
      std::ofstream groups(dir / "groups.txt");
      for (std::size_t g = 0; g < c.tweet_groups.size(); ++g) {
        if (g) groups << '\n';
        for (const auto& t : c.tweet_groups[g]) groups << t << '\n';
      }
      cli::write_lines(dir / "groups_reference.txt", c.group_references);
      auto clauses = propositions::generate_templated(100, derive_seed(td_seed, "clauses"));
      for (const auto& [sentence, props] : c.news_clauses) {
        clauses.push_back({sentence, props, propositions::RecordSource::kIngested});
      }
      propositions::write_clause_file(dir / "clauses.tsv", clauses);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  } catch (const tweetnews::Error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  }
  return 0;
}
