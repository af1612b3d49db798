#include "tweetnews/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

#include "tweetnews/error.hpp"

namespace tweetnews::cli {

namespace {

using Field = std::variant<std::uint64_t*, double*, bool*, std::string*>;
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "config fields assume a 64-bit size_t");

struct Entry {
  const char* key;
  std::function<Field(PipelineConfig&)> get;
};

#define TN_FIELD(key, member) Entry{key, [](PipelineConfig& c) -> Field { return &c.member; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      TN_FIELD("seed", seed),
      TN_FIELD("data.tweets", tweets),
      TN_FIELD("data.news", news),
      TN_FIELD("data.clauses", clauses),
      TN_FIELD("data.lexicon", lexicon),
      TN_FIELD("data.gazetteer", gazetteer),
      TN_FIELD("data.keywords", keywords),
      TN_FIELD("tokenizer.vocab_size", vocab_size),
      TN_FIELD("model.n_layers", model.n_layers),
      TN_FIELD("model.n_heads", model.n_heads),
      TN_FIELD("model.d_model", model.d_model),
      TN_FIELD("model.d_ff", model.d_ff),
      TN_FIELD("model.max_len", model.max_len),
      TN_FIELD("model.dropout", model.dropout_p),
      TN_FIELD("model.disc_hidden", disc_hidden),
      TN_FIELD("noise.mask_p", noise.mask_p),
      TN_FIELD("noise.drop_p", noise.drop_p),
      TN_FIELD("noise.shuffle_window", noise.shuffle_window),
      TN_FIELD("mlm.select_p", mlm.select_p),
      TN_FIELD("mlm.mask_frac", mlm.mask_frac),
      TN_FIELD("mlm.random_frac", mlm.random_frac),
      TN_FIELD("mlm.keep_frac", mlm.keep_frac),
      TN_FIELD("mlm.steps", mlm_steps),
      TN_FIELD("mlm.batch_size", mlm_batch_size),
      TN_FIELD("mlm.stream_len", mlm_stream_len),
      TN_FIELD("mlm.lr", mlm_lr),
      TN_FIELD("corrupt.spell_p", corrupt.spell_p),
      TN_FIELD("corrupt.ne_hashtag_p", corrupt.ne_hashtag_p),
      TN_FIELD("corrupt.random_hashtag_p", corrupt.random_hashtag_p),
      TN_FIELD("corrupt.synonym_p", corrupt.synonym_p),
      TN_FIELD("corrupt.function_drop_p", corrupt.function_drop_p),
      TN_FIELD("corrupt.hashtag_pool", hashtag_pool),
      TN_FIELD("style.cycles", style_cycles),
      TN_FIELD("style.batch_size", style_batch_size),
      TN_FIELD("style.lr", style_lr),
      TN_FIELD("style.disc_lr", disc_lr),
      TN_FIELD("style.dis", dis),
      TN_FIELD("style.syn", syn),
      TN_FIELD("style.checkpoint_every", checkpoint_every),
      TN_FIELD("merge.cycles", merge_cycles),
      TN_FIELD("merge.batch_size", merge_batch_size),
      TN_FIELD("merge.lr", merge_lr),
      TN_FIELD("merge.templated", merge_templated),
      TN_FIELD("merge.max_source_tokens", max_source_tokens),
      TN_FIELD("pipeline.style", pipeline_style),
      TN_FIELD("pipeline.merge", pipeline_merge),
      TN_FIELD("pipeline.concat_input", concat_input),
      TN_FIELD("filter.threshold", filter_threshold),
      TN_FIELD("cluster.k", cluster_k),
      TN_FIELD("cluster.max_iter", cluster_max_iter),
  };
  return table;
}

#undef TN_FIELD

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": cannot parse '" + v + "'");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key != e.key) continue;
    std::visit(
        [&](auto* field) {
          using T = std::remove_pointer_t<decltype(field)>;
          if constexpr (std::is_same_v<T, std::string>) {
            *field = value;
          } else if constexpr (std::is_same_v<T, bool>) {
            if (value == "true" || value == "1" || value == "yes") {
              *field = true;
            } else if (value == "false" || value == "0" || value == "no") {
              *field = false;
            } else {
              throw ConfigError(key + ": expected true/false, got '" + value + "'");
            }
          } else {
            *field = parse_number<T>(key, value);
          }
        },
        e.get(cfg));
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string serialize_config(const PipelineConfig& cfg) {
  PipelineConfig copy = cfg;
  std::string out;
  for (const auto& e : entries()) {
    out += e.key;
    out += " = ";
    std::visit(
        [&](auto* field) {
          using T = std::remove_pointer_t<decltype(field)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out += *field;
          } else if constexpr (std::is_same_v<T, bool>) {
            out += *field ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            out += format_double(*field);
          } else {
            out += std::to_string(*field);
          }
        },
        e.get(copy));
    out += "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

void PipelineConfig::validate() const {
  model::ModelConfig m = model;
  m.vocab_size = vocab_size;
  m.validate();
  noise.validate();
  mlm.validate();
  auto corrupt_check = corrupt;
  corrupt_check.hashtag_pool = {"#pool"};  // filled from the tweets at run time
  corrupt_check.validate();
  if (vocab_size < 16) throw ConfigError("tokenizer.vocab_size must be at least 16");
  if (disc_hidden == 0) throw ConfigError("model.disc_hidden must be positive");
  if (mlm_batch_size == 0 || style_batch_size == 0 || merge_batch_size == 0) {
    throw ConfigError("batch sizes must be positive");
  }
  if (mlm_stream_len < 2 || mlm_stream_len > model.max_len) {
    throw ConfigError("mlm.stream_len must lie in [2, model.max_len]");
  }
  for (double lr : {mlm_lr, style_lr, disc_lr, merge_lr}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  if (max_source_tokens < 2) throw ConfigError("merge.max_source_tokens must be at least 2");
  if (filter_threshold < -1.0 || filter_threshold > 1.0) throw ConfigError("filter.threshold must lie in [-1, 1]");
  if (cluster_k == 0) throw ConfigError("cluster.k must be positive");
}

objectives::ScheduleSpec PipelineConfig::style_schedule() const {
  objectives::ScheduleSpec s;
  s.objectives = {objectives::Objective::kRec, objectives::Objective::kBt};
  if (dis) {
    s.objectives.push_back(objectives::Objective::kDis);
    s.objectives.push_back(objectives::Objective::kAdv);
  }
  if (syn) s.objectives.push_back(objectives::Objective::kSyn);
  s.batch_size = style_batch_size;
  s.cycles = style_cycles;
  s.seed = derive_seed(seed, "style");
  s.checkpoint_every = checkpoint_every;
  s.noise = noise;
  return s;
}

}  // namespace tweetnews::cli
