#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tweetnews/corruptor/corruptor.hpp"
#include "tweetnews/datakit/batch.hpp"
#include "tweetnews/model/transformer.hpp"
#include "tweetnews/numerics/adam.hpp"

namespace tweetnews::objectives {

using datakit::Batch;
using model::Discriminator;
using model::StyleTransferModel;
using numerics::Tensor;
using tokenizer::TokenId;

/// Noise function C: drop, mask, then local shuffle.
struct NoiseSpec {
  double mask_p = 0.1;
  double drop_p = 0.1;
  std::size_t shuffle_window = 3;

  void validate() const;
};

struct MlmSpec {
  double select_p = 0.15;
  double mask_frac = 0.8;
  double random_frac = 0.1;
  double keep_frac = 0.1;

  void validate() const;
};

struct MlmExample {
  std::vector<TokenId> tokens;        // corrupted stream
  std::vector<std::size_t> positions;  // selected positions, ascending
  std::vector<TokenId> originals;      // original id at each selected position
};

/// Selects each token independently with select_p; a selected token becomes
/// MASK, a random non-special id, or stays, in the 80/10/10 proportions.
MlmExample apply_mlm_mask(std::span<const TokenId> stream, const MlmSpec& spec, std::size_t vocab_size,
                          std::uint64_t seed);

/// Noise over unframed content ids. Never returns an empty sequence: a
/// fully dropped sequence is re-drawn once, then replaced by a single UNK.
std::vector<TokenId> noise_tokens(std::span<const TokenId> ids, const NoiseSpec& spec, Rng& rng);

/// Applies noise_tokens to the interior of every BOS..EOS row.
Batch noise_C(const Batch& batch, const NoiseSpec& spec, std::uint64_t seed);

/// Mean token cross-entropy of `target` decoded from encode(source).
Tensor seq2seq_loss(StyleTransferModel& model, const Batch& source, Style source_style, const Batch& target,
                    Style target_style);

/// L_rec: CE(x | D(E(C(x), l1), l1)) + CE(y | D(E(C(y), l2), l2)).
Tensor denoise_loss(StyleTransferModel& model, const Batch& x, const Batch& y, const NoiseSpec& noise,
                    std::uint64_t seed);

struct BacktranslateLoss {
  std::optional<Tensor> loss;  // empty when every pair was skipped
  std::size_t skipped = 0;     // empty generations
};

/// L_bt: y' = M12(x) and x' = M21(y) generated greedily (no gradient,
/// max_new = 1.5 x source length), then CE(x | D(E(y', l2), l1)) +
/// CE(y | D(E(x', l1), l2)). Pairs whose generation is empty are skipped.
BacktranslateLoss backtranslate_loss(StyleTransferModel& model, const Batch& x, const Batch& y);

/// L_D = E[-log p(l1|z_x)] + E[-log(1 - p(l1|z_y))] with the encoder output
/// detached.
Tensor discriminator_loss(StyleTransferModel& model, Discriminator& disc, const Batch& x, const Batch& y);

/// L_adv = -L_D with gradients flowing into the encoder.
Tensor adversarial_loss(StyleTransferModel& model, Discriminator& disc, const Batch& x, const Batch& y);

/// L_syn: source H(y) encoded with l1, decoded with l2 against y.
Tensor synthetic_loss(StyleTransferModel& model, const tokenizer::Vocab& vocab, const std::vector<std::string>& news,
                      const corruptor::Corruptor& corruptor, std::uint64_t seed);

/// Merge sources with more content tokens than this (BOS/EOS excluded) are
/// rejected.
inline constexpr std::size_t kMaxMergeSourceTokens = 512;

/// L_m: CE(y | D(E(P(y), l1), l2)).
Tensor merge_loss(StyleTransferModel& model, const Batch& propositions, const Batch& sentences);

/// Masked-LM loss over the selected positions of a batch of streams.
/// Returns nullopt when no position was selected.
std::optional<Tensor> mlm_loss(StyleTransferModel& model, const std::vector<std::vector<TokenId>>& streams,
                               Style style, const MlmSpec& spec, std::uint64_t seed);

enum class Objective { kRec, kBt, kDis, kAdv, kSyn, kMerge, kMlm };

/// "L_rec", "L_bt", "L_D", "L_adv", "L_syn", "L_m", "MLM".
const char* objective_name(Objective o);
/// Inverse of objective_name; also accepts rec, bt, dis, adv, syn, merge, mlm.
Objective parse_objective(const std::string& name);

/// Owns one Adam state per parameter set: the whole model (L_rec, L_bt,
/// L_syn, L_m), encoder side (L_adv), encoder plus output projection (MLM)
/// and the discriminator (L_D). Each step updates only its own set.
class Trainer {
 public:
  Trainer(StyleTransferModel& model, Discriminator* disc, numerics::AdamConfig adam,
          numerics::AdamConfig disc_adam);

  double step_denoise(const Batch& x, const Batch& y, const NoiseSpec& noise, std::uint64_t seed);
  /// Returns nullopt (and updates nothing) when every pair was skipped.
  std::optional<double> step_backtranslate(const Batch& x, const Batch& y, std::size_t* skipped = nullptr);
  double step_discriminator(const Batch& x, const Batch& y);
  double step_adversarial(const Batch& x, const Batch& y);
  double step_synthetic(const tokenizer::Vocab& vocab, const std::vector<std::string>& news,
                        const corruptor::Corruptor& corruptor, std::uint64_t seed);
  double step_merge(const Batch& propositions, const Batch& sentences);
  std::optional<double> step_mlm(const std::vector<std::vector<TokenId>>& streams, Style style, const MlmSpec& spec,
                                 std::uint64_t seed);

  StyleTransferModel& model() { return model_; }
  Discriminator* discriminator() { return disc_; }

 private:
  double apply(Tensor loss, std::vector<Tensor>& params, numerics::AdamState& state);

  StyleTransferModel& model_;
  Discriminator* disc_;
  std::vector<Tensor> all_, encoder_, mlm_, disc_params_;
  numerics::AdamState all_state_, encoder_state_, mlm_state_, disc_state_;
};

/// Shuffled cursor over n items; reshuffles with a derived seed when the
/// data is exhausted.
class DataCursor {
 public:
  DataCursor(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t count);
  std::size_t epoch() const { return epoch_; }

 private:
  void reshuffle();
  std::size_t n_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t pos_ = 0;
  std::vector<std::size_t> order_;
};

struct ScheduleSpec {
  /// Enabled objectives; run_schedule visits them in the canonical order
  /// L_rec, L_bt, L_D, L_adv, L_syn, L_m regardless of listing order.
  std::vector<Objective> objectives;
  std::size_t batch_size = 4;
  std::size_t cycles = 1;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // cycles; 0 disables
  NoiseSpec noise;
};

struct TrainingData {
  std::vector<std::string> tweets;  // style l1
  std::vector<std::string> news;    // style l2
  std::vector<std::pair<std::string, std::string>> merge_pairs;  // (P(y), y)
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t cycle = 0;
  Objective objective = Objective::kRec;
  std::optional<double> loss;  // absent when the step was skipped
  std::size_t skipped = 0;
};

struct ScheduleHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(std::size_t cycle)> on_checkpoint;
};

/// Alternates one minibatch per enabled objective per cycle. A sentence
/// whose framed encoding exceeds the model's max_len is a DataError.
std::vector<StepRecord> run_schedule(const ScheduleSpec& spec, Trainer& trainer, const tokenizer::Vocab& vocab,
                                     const TrainingData& data, const corruptor::Corruptor* corruptor,
                                     const ScheduleHooks& hooks = {});

/// MLM pretraining on 256-token streams of both styles, alternating styles
/// per step.
std::vector<StepRecord> run_mlm(Trainer& trainer, const std::vector<std::vector<TokenId>>& l1_streams,
                                const std::vector<std::vector<TokenId>>& l2_streams, std::size_t steps,
                                std::size_t batch_size, const MlmSpec& spec, std::uint64_t seed,
                                const ScheduleHooks& hooks = {});

/// `{"step":..,"cycle":..,"objective":"L_rec","loss":..,"skipped":..}`
/// with losses printed to 17 significant digits.
std::string to_json_line(const StepRecord& r);

}  // namespace tweetnews::objectives
