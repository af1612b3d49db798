#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tweetnews/cli/config.hpp"
#include "tweetnews/model/checkpoint.hpp"
#include "tweetnews/propositions/propositions.hpp"

namespace tweetnews::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Output directory of one run: effective config, versions stamp, metrics
/// log and checkpoints. Existing files are overwritten.
class RunDir {
 public:
  RunDir(std::filesystem::path dir, const PipelineConfig& cfg);

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }
  /// Appends one JSON line; `stage` is added as the first key when non-empty.
  void log(const objectives::StepRecord& r, const std::string& stage = "");

 private:
  std::filesystem::path dir_;
  std::ofstream metrics_;
};

/// Deterministic build description written next to every run.
std::string versions_stamp();

/// Non-empty lines of a UTF-8 text file. Throws DataError if unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);
/// Groups separated by blank lines.
std::vector<std::vector<std::string>> read_groups(const std::filesystem::path& path);

tokenizer::Vocab train_vocab(const PipelineConfig& cfg, const std::vector<std::string>& texts);

model::ModelConfig model_config(const PipelineConfig& cfg, std::size_t vocab_size);
/// Loads a checkpoint and checks it against the vocabulary.
model::StyleTransferModel load_model(const std::filesystem::path& path, const tokenizer::Vocab& vocab);

corruptor::Corruptor make_corruptor(const PipelineConfig& cfg, const std::vector<std::string>& tweets);

/// Masked-LM fine-tuning on 256-token streams of tweets (l1) and news (l2),
/// then the decoder is initialised from the encoder.
model::StyleTransferModel pretrain_mlm(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                       const std::vector<std::string>& tweets, const std::vector<std::string>& news,
                                       std::optional<model::StyleTransferModel> init, RunDir* run);

struct StyleModels {
  model::StyleTransferModel model;
  std::optional<model::Discriminator> disc;
};

/// Alternates L_rec, L_bt and, per cfg.dis / cfg.syn, L_D + L_adv and L_syn.
StyleModels train_style(const PipelineConfig& cfg, const tokenizer::Vocab& vocab, const std::vector<std::string>& tweets,
                        const std::vector<std::string>& news, std::optional<model::StyleTransferModel> init,
                        RunDir* run);

/// Clause file (when it exists) plus cfg.merge_templated generated records.
std::vector<propositions::MergePair> merge_corpus(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                                  propositions::BuildReport* report = nullptr);
void write_merge_pairs(const std::filesystem::path& path, const std::vector<propositions::MergePair>& pairs);
std::vector<std::pair<std::string, std::string>> read_merge_pairs(const std::filesystem::path& path);

model::StyleTransferModel train_merge(const PipelineConfig& cfg, const tokenizer::Vocab& vocab,
                                      const std::vector<std::pair<std::string, std::string>>& pairs,
                                      std::optional<model::StyleTransferModel> init, RunDir* run);

/// Greedy tweet -> news generation, at most 2x the source length.
std::vector<std::string> transfer(model::StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                  const std::vector<std::string>& tweets);

/// Pairwise merge of every group into one paragraph.
std::vector<std::string> merge_groups(model::StyleTransferModel& model, const tokenizer::Vocab& vocab,
                                      const std::vector<std::vector<std::string>>& groups);

struct PipelineResult {
  std::vector<std::string> paragraphs;
  std::optional<std::string> bleu;  // formatted line when a reference was given
};

/// Full run into `out`: vocabulary, MLM fine-tuning, style transfer and
/// merge training as enabled, then transfer + merge of the tweet groups.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& groups,
                            const std::optional<std::filesystem::path>& reference, const std::filesystem::path& out);

}  // namespace tweetnews::cli
