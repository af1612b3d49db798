#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tweetnews/corruptor/corruptor.hpp"
#include "tweetnews/model/config.hpp"
#include "tweetnews/objectives/objectives.hpp"

namespace tweetnews::cli {

/// Everything a run needs. Defaults are desk scale; configs/paper.conf
/// lists the published values.
struct PipelineConfig {
  std::uint64_t seed = 0;

  // Corpus paths; empty means "not provided".
  std::string tweets = "data/tweets.txt";
  std::string news = "data/news.txt";
  std::string clauses = "data/clauses.tsv";
  std::string lexicon;
  std::string gazetteer;
  std::string keywords;

  std::size_t vocab_size = 1000;
  model::ModelConfig model;
  std::size_t disc_hidden = 64;

  objectives::NoiseSpec noise;
  objectives::MlmSpec mlm;
  std::size_t mlm_steps = 40;
  std::size_t mlm_batch_size = 8;
  std::size_t mlm_stream_len = 256;
  double mlm_lr = 1e-3;

  corruptor::CorruptionSpec corrupt;
  std::size_t hashtag_pool = 100;

  std::size_t style_cycles = 300;
  std::size_t style_batch_size = 4;
  double style_lr = 1e-3;
  double disc_lr = 1e-3;
  bool dis = true;
  bool syn = true;
  std::size_t checkpoint_every = 0;

  std::size_t merge_cycles = 600;
  std::size_t merge_batch_size = 4;
  double merge_lr = 1e-3;
  std::size_t merge_templated = 0;  // generated records added to the clause file
  std::size_t max_source_tokens = 512;

  bool pipeline_style = true;
  bool pipeline_merge = true;
  bool concat_input = false;  // transfer the four tweets as one input

  double filter_threshold = 0.2;
  std::size_t cluster_k = 4;
  std::size_t cluster_max_iter = 100;

  /// Throws ConfigError on invalid values.
  void validate() const;
  objectives::ScheduleSpec style_schedule() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and bad
/// values raise ConfigError naming the origin and line.
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);
/// Applies one `key=value` override.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);
/// Every key in a fixed order, doubles in shortest round-trip form.
std::string serialize_config(const PipelineConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace tweetnews::cli
