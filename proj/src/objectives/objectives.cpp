#include "tweetnews/objectives/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tweetnews/error.hpp"
#include "tweetnews/numerics/ops.hpp"

namespace tweetnews::objectives {

namespace ops = numerics;
using tokenizer::kBos;
using tokenizer::kEos;

void NoiseSpec::validate() const {
  if (!(mask_p >= 0.0 && mask_p < 1.0) || !(drop_p >= 0.0 && drop_p <= 1.0)) {
    throw ConfigError("noise spec: mask_p must lie in [0, 1) and drop_p in [0, 1]");
  }
  if (shuffle_window < 1) throw ConfigError("noise spec: shuffle_window must be at least 1");
}

void MlmSpec::validate() const {
  if (!(select_p >= 0.0 && select_p <= 1.0)) throw ConfigError("mlm spec: select_p must lie in [0, 1]");
  if (mask_frac < 0 || random_frac < 0 || keep_frac < 0 ||
      std::abs(mask_frac + random_frac + keep_frac - 1.0) > 1e-12) {
    throw ConfigError("mlm spec: mask/random/keep fractions must be non-negative and sum to 1");
  }
}

MlmExample apply_mlm_mask(std::span<const TokenId> stream, const MlmSpec& spec, std::size_t vocab_size,
                          std::uint64_t seed) {
  spec.validate();
  if (stream.empty()) throw DataError("apply_mlm_mask: empty stream");
  if (vocab_size <= static_cast<std::size_t>(tokenizer::kNumSpecials)) {
    throw ConfigError("apply_mlm_mask: vocabulary has no ordinary tokens");
  }
  Rng rng(seed);
  MlmExample ex;
  ex.tokens.assign(stream.begin(), stream.end());
  const auto n_ordinary = vocab_size - tokenizer::kNumSpecials;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!rng.bernoulli(spec.select_p)) continue;
    ex.positions.push_back(i);
    ex.originals.push_back(stream[i]);
    const double u = rng.uniform();
    if (u < spec.mask_frac) {
      ex.tokens[i] = tokenizer::kMask;
    } else if (u < spec.mask_frac + spec.random_frac) {
      ex.tokens[i] = static_cast<TokenId>(tokenizer::kNumSpecials + rng.below(n_ordinary));
    }
  }
  return ex;
}

std::vector<TokenId> noise_tokens(std::span<const TokenId> ids, const NoiseSpec& spec, Rng& rng) {
  spec.validate();
  if (ids.empty()) return {tokenizer::kUnk};
  std::vector<TokenId> kept;
  for (int attempt = 0; attempt < 2 && kept.empty(); ++attempt) {
    for (TokenId id : ids) {
      if (!rng.bernoulli(spec.drop_p)) kept.push_back(id);
    }
  }
  if (kept.empty()) return {tokenizer::kUnk};
  for (auto& id : kept) {
    if (rng.bernoulli(spec.mask_p)) id = tokenizer::kMask;
  }
  // Sorting by i + U[0, k) moves no token more than k - 1 places.
  std::vector<std::pair<double, TokenId>> keyed;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    keyed.emplace_back(static_cast<double>(i) + rng.uniform() * static_cast<double>(spec.shuffle_window), kept[i]);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = keyed[i].second;
  return kept;
}

namespace {

// Content ids of a framed row (BOS/EOS stripped when present).
std::vector<TokenId> interior(const std::vector<TokenId>& row) {
  std::size_t b = 0, e = row.size();
  if (b < e && row[b] == kBos) ++b;
  if (e > b && row[e - 1] == kEos) --e;
  return {row.begin() + static_cast<std::ptrdiff_t>(b), row.begin() + static_cast<std::ptrdiff_t>(e)};
}

Batch select_rows(const Batch& b, const std::vector<std::size_t>& keep) {
  std::vector<std::vector<TokenId>> rows;
  for (auto r : keep) rows.push_back(b.row(r));
  return datakit::pad_batch(rows, b.styles.empty() ? Style::kL1 : b.styles[0]);
}

void check_styles(Style a, Style b) {
  if (static_cast<int>(a) > 1 || static_cast<int>(b) > 1 || static_cast<int>(a) < 0 || static_cast<int>(b) < 0) {
    throw ConfigError("style tags must be l1 or l2");
  }
}

// Targets shifted by one and the mask of real next tokens.
void shifted_targets(const Batch& t, std::vector<std::int32_t>& y, std::vector<std::uint8_t>& m) {
  y.clear();
  m.clear();
  for (std::size_t b = 0; b < t.batch_size; ++b) {
    for (std::size_t i = 0; i + 1 < t.seq_len; ++i) {
      y.push_back(t.at(b, i + 1));
      m.push_back(i + 1 < t.lengths[b]);
    }
  }
}

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

Tensor raw_dis_loss(StyleTransferModel& model, Discriminator& disc, const Batch& x, const Batch& y) {
  auto zx = model.encode(x, Style::kL1);
  auto zy = model.encode(y, Style::kL2);
  return ops::add(ops::bce_with_logits(disc.logits(zx), constant(x.batch_size, 1.0)),
                  ops::bce_with_logits(disc.logits(zy), constant(y.batch_size, 0.0)));
}

void zero_all(std::vector<Tensor>& params) {
  for (auto& p : params) p.zero_grad();
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string(what) + " became non-finite");
}

}  // namespace

Batch noise_C(const Batch& batch, const NoiseSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<TokenId>> rows;
  for (std::size_t r = 0; r < batch.batch_size; ++r) {
    auto row = batch.row(r);
    const bool framed = row.size() >= 2 && row.front() == kBos && row.back() == kEos;
    auto noised = noise_tokens(framed ? interior(row) : row, spec, rng);
    rows.push_back(framed ? datakit::frame(noised) : noised);
  }
  auto out = datakit::pad_batch(rows, batch.styles.empty() ? Style::kL1 : batch.styles[0]);
  out.styles = batch.styles;
  return out;
}

Tensor seq2seq_loss(StyleTransferModel& model, const Batch& source, Style source_style, const Batch& target,
                    Style target_style) {
  check_styles(source_style, target_style);
  auto z = model.encode(source, source_style);
  auto logits = model.decode_teacher_forced(z, target, target_style);
  std::vector<std::int32_t> y;
  std::vector<std::uint8_t> m;
  shifted_targets(target, y, m);
  return ops::cross_entropy(logits, y, m);
}

Tensor denoise_loss(StyleTransferModel& model, const Batch& x, const Batch& y, const NoiseSpec& noise,
                    std::uint64_t seed) {
  auto lx = seq2seq_loss(model, noise_C(x, noise, derive_seed(seed, 1)), Style::kL1, x, Style::kL1);
  auto ly = seq2seq_loss(model, noise_C(y, noise, derive_seed(seed, 2)), Style::kL2, y, Style::kL2);
  return ops::add(lx, ly);
}

BacktranslateLoss backtranslate_loss(StyleTransferModel& model, const Batch& x, const Batch& y) {
  BacktranslateLoss out;
  const std::size_t cap = model.config().max_len - 2;
  // One direction: source batch in style `from`, synthetic in style `to`,
  // loss reconstructs the source from the synthetic.
  auto direction = [&](const Batch& src, Style from, Style to) -> std::optional<Tensor> {
    std::vector<std::vector<TokenId>> synthetic;
    {
      numerics::NoGradGuard no_grad;
      auto z = model.encode(src, from);
      std::vector<std::size_t> max_new(src.batch_size);
      for (std::size_t b = 0; b < src.batch_size; ++b) {
        const auto content = src.lengths[b] >= 2 ? src.lengths[b] - 2 : src.lengths[b];
        max_new[b] = std::clamp<std::size_t>((3 * content + 1) / 2, 1, cap);
      }
      synthetic = model.generate(z, to, max_new, model::DecodeMode::kGreedy);
    }
    std::vector<std::vector<TokenId>> sources;
    std::vector<std::size_t> keep;
    for (std::size_t b = 0; b < synthetic.size(); ++b) {
      if (synthetic[b].empty()) {
        ++out.skipped;
        continue;
      }
      sources.push_back(datakit::frame(synthetic[b]));
      keep.push_back(b);
    }
    if (keep.empty()) return std::nullopt;
    auto source_batch = datakit::pad_batch(sources, to);
    return seq2seq_loss(model, source_batch, to, select_rows(src, keep), from);
  };
  auto a = direction(x, Style::kL1, Style::kL2);
  auto b = direction(y, Style::kL2, Style::kL1);
  if (a && b) {
    out.loss = ops::add(*a, *b);
  } else if (a) {
    out.loss = a;
  } else if (b) {
    out.loss = b;
  }
  return out;
}

Tensor discriminator_loss(StyleTransferModel& model, Discriminator& disc, const Batch& x, const Batch& y) {
  auto zx = [&] {
    numerics::NoGradGuard no_grad;
    return model.encode(x, Style::kL1);
  }();
  auto zy = [&] {
    numerics::NoGradGuard no_grad;
    return model.encode(y, Style::kL2);
  }();
  return ops::add(ops::bce_with_logits(disc.logits(zx), constant(x.batch_size, 1.0)),
                  ops::bce_with_logits(disc.logits(zy), constant(y.batch_size, 0.0)));
}

Tensor adversarial_loss(StyleTransferModel& model, Discriminator& disc, const Batch& x, const Batch& y) {
  return ops::scale(raw_dis_loss(model, disc, x, y), -1.0);
}

Tensor synthetic_loss(StyleTransferModel& model, const tokenizer::Vocab& vocab, const std::vector<std::string>& news,
                      const corruptor::Corruptor& corruptor, std::uint64_t seed) {
  if (news.empty()) throw DataError("synthetic_loss: no news sentences");
  std::vector<std::vector<TokenId>> sources, targets;
  for (std::size_t i = 0; i < news.size(); ++i) {
    auto tgt = datakit::frame(vocab.encode(news[i]));
    auto src = datakit::frame(vocab.encode(corruptor.corrupt(news[i], derive_seed(seed, i))));
    if (src.size() > model.config().max_len) src.resize(model.config().max_len);  // hashtags can lengthen H(y)
    if (src.back() != kEos) src.back() = kEos;
    sources.push_back(std::move(src));
    targets.push_back(std::move(tgt));
  }
  return seq2seq_loss(model, datakit::pad_batch(sources, Style::kL1), Style::kL1,
                      datakit::pad_batch(targets, Style::kL2), Style::kL2);
}

Tensor merge_loss(StyleTransferModel& model, const Batch& propositions, const Batch& sentences) {
  for (std::size_t b = 0; b < propositions.batch_size; ++b) {
    const auto content = propositions.lengths[b] >= 2 ? propositions.lengths[b] - 2 : propositions.lengths[b];
    if (content > kMaxMergeSourceTokens) {
      throw DataError("merge_loss: source row " + std::to_string(b) + " has " + std::to_string(content) +
                      " tokens, over the " +
                      std::to_string(kMaxMergeSourceTokens) + "-token limit");
    }
  }
  return seq2seq_loss(model, propositions, Style::kProposition, sentences, Style::kSentence);
}

std::optional<Tensor> mlm_loss(StyleTransferModel& model, const std::vector<std::vector<TokenId>>& streams,
                               Style style, const MlmSpec& spec, std::uint64_t seed) {
  if (streams.empty()) throw DataError("mlm_loss: no streams");
  std::vector<std::vector<TokenId>> corrupted;
  std::vector<std::int32_t> targets;
  std::vector<std::uint8_t> mask;
  const std::size_t len = streams.front().size();
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].size() != len) throw ShapeError("mlm_loss: streams differ in length");
    auto ex = apply_mlm_mask(streams[i], spec, model.config().vocab_size, derive_seed(seed, i));
    std::vector<std::int32_t> t(len, 0);
    std::vector<std::uint8_t> m(len, 0);
    for (std::size_t k = 0; k < ex.positions.size(); ++k) {
      t[ex.positions[k]] = ex.originals[k];
      m[ex.positions[k]] = 1;
    }
    targets.insert(targets.end(), t.begin(), t.end());
    mask.insert(mask.end(), m.begin(), m.end());
    corrupted.push_back(std::move(ex.tokens));
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) return std::nullopt;
  auto logits = model.mlm_logits(datakit::pad_batch(corrupted, style), style);
  return ops::cross_entropy(logits, targets, mask);
}

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::kRec: return "L_rec";
    case Objective::kBt: return "L_bt";
    case Objective::kDis: return "L_D";
    case Objective::kAdv: return "L_adv";
    case Objective::kSyn: return "L_syn";
    case Objective::kMerge: return "L_m";
    case Objective::kMlm: return "MLM";
  }
  return "?";
}

Objective parse_objective(const std::string& name) {
  static const std::pair<const char*, Objective> table[] = {
      {"rec", Objective::kRec}, {"bt", Objective::kBt},       {"dis", Objective::kDis}, {"adv", Objective::kAdv},
      {"syn", Objective::kSyn}, {"merge", Objective::kMerge}, {"mlm", Objective::kMlm},
  };
  for (const auto& [short_name, o] : table) {
    if (name == short_name || name == objective_name(o)) return o;
  }
  throw ConfigError("unknown objective '" + name + "'");
}

Trainer::Trainer(StyleTransferModel& model, Discriminator* disc, numerics::AdamConfig adam,
                 numerics::AdamConfig disc_adam)
    : model_(model), disc_(disc) {
  all_ = model::tensors_of(model.parameters());
  encoder_ = model::tensors_of(model.encoder_parameters());
  mlm_ = encoder_;
  mlm_.push_back(model.parameter("out.w"));
  mlm_.push_back(model.parameter("out.b"));
  if (disc) disc_params_ = model::tensors_of(disc->parameters());
  all_state_ = numerics::make_adam_state(all_, adam);
  encoder_state_ = numerics::make_adam_state(encoder_, adam);
  mlm_state_ = numerics::make_adam_state(mlm_, adam);
  disc_state_ = numerics::make_adam_state(disc_params_, disc_adam);
}

double Trainer::apply(Tensor loss, std::vector<Tensor>& params, numerics::AdamState& state) {
  const double value = loss.item();
  check_finite(value, "loss");
  numerics::backward(loss);
  numerics::adam_step(params, state);
  // Gradients that reached parameters outside the stepped set are discarded.
  zero_all(all_);
  zero_all(disc_params_);
  return value;
}

double Trainer::step_denoise(const Batch& x, const Batch& y, const NoiseSpec& noise, std::uint64_t seed) {
  return apply(denoise_loss(model_, x, y, noise, seed), all_, all_state_);
}

std::optional<double> Trainer::step_backtranslate(const Batch& x, const Batch& y, std::size_t* skipped) {
  auto bt = backtranslate_loss(model_, x, y);
  if (skipped) *skipped = bt.skipped;
  if (!bt.loss) return std::nullopt;
  return apply(*bt.loss, all_, all_state_);
}

double Trainer::step_discriminator(const Batch& x, const Batch& y) {
  if (!disc_) throw ConfigError("discriminator step requested without a discriminator");
  return apply(discriminator_loss(model_, *disc_, x, y), disc_params_, disc_state_);
}

double Trainer::step_adversarial(const Batch& x, const Batch& y) {
  if (!disc_) throw ConfigError("adversarial step requested without a discriminator");
  return apply(adversarial_loss(model_, *disc_, x, y), encoder_, encoder_state_);
}

double Trainer::step_synthetic(const tokenizer::Vocab& vocab, const std::vector<std::string>& news,
                               const corruptor::Corruptor& corruptor, std::uint64_t seed) {
  return apply(synthetic_loss(model_, vocab, news, corruptor, seed), all_, all_state_);
}

double Trainer::step_merge(const Batch& propositions, const Batch& sentences) {
  return apply(merge_loss(model_, propositions, sentences), all_, all_state_);
}

std::optional<double> Trainer::step_mlm(const std::vector<std::vector<TokenId>>& streams, Style style,
                                        const MlmSpec& spec, std::uint64_t seed) {
  auto loss = mlm_loss(model_, streams, style, spec, seed);
  if (!loss) return std::nullopt;
  return apply(*loss, mlm_, mlm_state_);
}

DataCursor::DataCursor(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {
  if (n == 0) throw DataError("data source is empty");
  reshuffle();
}

void DataCursor::reshuffle() {
  order_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
  Rng rng(derive_seed(seed_, epoch_));
  rng.shuffle(order_);
  pos_ = 0;
}

std::vector<std::size_t> DataCursor::next(std::size_t count) {
  std::vector<std::size_t> out;
  while (out.size() < count) {
    if (pos_ == n_) {
      ++epoch_;
      reshuffle();
    }
    out.push_back(order_[pos_++]);
  }
  return out;
}

namespace {

std::vector<std::vector<TokenId>> encode_all(const std::vector<std::string>& lines, const tokenizer::Vocab& vocab,
                                             std::size_t max_len, const char* what) {
  std::vector<std::vector<TokenId>> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto framed = datakit::frame(vocab.encode(lines[i]));
    if (framed.size() > max_len) {
      throw DataError(std::string(what) + " line " + std::to_string(i + 1) + " has " +
                      std::to_string(framed.size()) + " tokens, over max_len " + std::to_string(max_len));
    }
    out.push_back(std::move(framed));
  }
  return out;
}

Batch gather(const std::vector<std::vector<TokenId>>& rows, const std::vector<std::size_t>& idx, Style style) {
  std::vector<std::vector<TokenId>> picked;
  for (auto i : idx) picked.push_back(rows[i]);
  return datakit::pad_batch(picked, style);
}

}  // namespace

std::vector<StepRecord> run_schedule(const ScheduleSpec& spec, Trainer& trainer, const tokenizer::Vocab& vocab,
                                     const TrainingData& data, const corruptor::Corruptor* corruptor,
                                     const ScheduleHooks& hooks) {
  spec.noise.validate();
  if (spec.batch_size == 0) throw ConfigError("schedule: batch_size must be positive");
  static const Objective canonical[] = {Objective::kRec, Objective::kBt,  Objective::kDis,
                                        Objective::kAdv, Objective::kSyn, Objective::kMerge};
  std::vector<Objective> order;
  for (auto o : canonical) {
    if (std::find(spec.objectives.begin(), spec.objectives.end(), o) != spec.objectives.end()) order.push_back(o);
  }
  if (order.empty()) throw ConfigError("schedule: no objectives enabled");
  for (auto o : spec.objectives) {
    if (o == Objective::kMlm) throw ConfigError("schedule: MLM runs through run_mlm, not run_schedule");
  }

  const auto needs = [&](Objective o) { return std::find(order.begin(), order.end(), o) != order.end(); };
  const bool style_data = needs(Objective::kRec) || needs(Objective::kBt) || needs(Objective::kDis) ||
                          needs(Objective::kAdv);
  const std::size_t max_len = trainer.model().config().max_len;
  std::vector<std::vector<TokenId>> tweets, news, merge_src, merge_tgt;
  std::optional<DataCursor> tweet_cur, news_cur, syn_cur, merge_cur;
  if (style_data) {
    tweets = encode_all(data.tweets, vocab, max_len, "tweet");
    news = encode_all(data.news, vocab, max_len, "news");
    if (tweets.empty() || news.empty()) throw DataError("schedule: style objectives need tweets and news");
    tweet_cur.emplace(tweets.size(), derive_seed(spec.seed, "tweets"));
    news_cur.emplace(news.size(), derive_seed(spec.seed, "news"));
  }
  if (needs(Objective::kSyn)) {
    if (!corruptor) throw ConfigError("schedule: L_syn needs a corruptor");
    if (data.news.empty()) throw DataError("schedule: L_syn needs news sentences");
    encode_all(data.news, vocab, max_len, "news");
    syn_cur.emplace(data.news.size(), derive_seed(spec.seed, "syn"));
  }
  if (needs(Objective::kMerge)) {
    std::vector<std::string> srcs, tgts;
    for (const auto& [s, t] : data.merge_pairs) {
      srcs.push_back(s);
      tgts.push_back(t);
    }
    merge_src = encode_all(srcs, vocab, std::min(max_len, kMaxMergeSourceTokens + 2), "merge source");
    merge_tgt = encode_all(tgts, vocab, max_len, "merge target");
    if (merge_src.empty()) throw DataError("schedule: L_m needs merge pairs");
    merge_cur.emplace(merge_src.size(), derive_seed(spec.seed, "merge"));
  }

  std::vector<StepRecord> log;
  std::size_t step = 0;
  for (std::size_t cycle = 0; cycle < spec.cycles; ++cycle) {
    for (auto o : order) {
      StepRecord rec;
      rec.step = step;
      rec.cycle = cycle;
      rec.objective = o;
      const auto step_seed = derive_seed(spec.seed, step);
      switch (o) {
        case Objective::kRec:
        case Objective::kBt:
        case Objective::kDis:
        case Objective::kAdv: {
          auto x = gather(tweets, tweet_cur->next(spec.batch_size), Style::kL1);
          auto y = gather(news, news_cur->next(spec.batch_size), Style::kL2);
          if (o == Objective::kRec) rec.loss = trainer.step_denoise(x, y, spec.noise, step_seed);
          if (o == Objective::kBt) rec.loss = trainer.step_backtranslate(x, y, &rec.skipped);
          if (o == Objective::kDis) rec.loss = trainer.step_discriminator(x, y);
          if (o == Objective::kAdv) rec.loss = trainer.step_adversarial(x, y);
          break;
        }
        case Objective::kSyn: {
          std::vector<std::string> batch;
          for (auto i : syn_cur->next(spec.batch_size)) batch.push_back(data.news[i]);
          rec.loss = trainer.step_synthetic(vocab, batch, *corruptor, step_seed);
          break;
        }
        case Objective::kMerge: {
          auto idx = merge_cur->next(spec.batch_size);
          rec.loss = trainer.step_merge(gather(merge_src, idx, Style::kProposition),
                                        gather(merge_tgt, idx, Style::kSentence));
          break;
        }
        case Objective::kMlm:
          break;
      }
      if (hooks.on_step) hooks.on_step(rec);
      log.push_back(rec);
      ++step;
    }
    if (spec.checkpoint_every > 0 && (cycle + 1) % spec.checkpoint_every == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(cycle + 1);
    }
  }
  return log;
}

std::vector<StepRecord> run_mlm(Trainer& trainer, const std::vector<std::vector<TokenId>>& l1_streams,
                                const std::vector<std::vector<TokenId>>& l2_streams, std::size_t steps,
                                std::size_t batch_size, const MlmSpec& spec, std::uint64_t seed,
                                const ScheduleHooks& hooks) {
  if (l1_streams.empty() && l2_streams.empty()) throw DataError("mlm: no streams (corpus shorter than one window?)");
  if (batch_size == 0) throw ConfigError("mlm: batch_size must be positive");
  std::optional<DataCursor> c1, c2;
  if (!l1_streams.empty()) c1.emplace(l1_streams.size(), derive_seed(seed, "mlm-l1"));
  if (!l2_streams.empty()) c2.emplace(l2_streams.size(), derive_seed(seed, "mlm-l2"));
  std::vector<StepRecord> log;
  for (std::size_t step = 0; step < steps; ++step) {
    bool use_l1 = step % 2 == 0;
    if (!c1) use_l1 = false;
    if (!c2) use_l1 = true;
    const auto& pool = use_l1 ? l1_streams : l2_streams;
    std::vector<std::vector<TokenId>> batch;
    for (auto i : (use_l1 ? *c1 : *c2).next(batch_size)) batch.push_back(pool[i]);
    StepRecord rec;
    rec.step = step;
    rec.cycle = step;
    rec.objective = Objective::kMlm;
    rec.loss = trainer.step_mlm(batch, use_l1 ? Style::kL1 : Style::kL2, spec, derive_seed(seed, step));
    if (hooks.on_step) hooks.on_step(rec);
    log.push_back(rec);
  }
  return log;
}

std::string to_json_line(const StepRecord& r) {
  char loss[64] = "null";
  if (r.loss) std::snprintf(loss, sizeof loss, "%.17g", *r.loss);
  char buf[256];
  std::snprintf(buf, sizeof buf, "{\"step\":%zu,\"cycle\":%zu,\"objective\":\"%s\",\"loss\":%s,\"skipped\":%zu}",
                r.step, r.cycle, objective_name(r.objective), loss, r.skipped);
  return buf;
}

}  // namespace tweetnews::objectives
