#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tweetnews/datakit/batch.hpp"
#include "tweetnews/model/config.hpp"
#include "tweetnews/numerics/tensor.hpp"

namespace tweetnews::model {

using datakit::Batch;
using numerics::Tensor;
using tokenizer::TokenId;

/// Encoder output: per-token content vectors z [B, S, d_model] and the
/// padding mask [B * S] that travels with them.
struct ContentVectors {
  Tensor z;
  std::vector<std::uint8_t> mask;
  std::size_t batch_size = 0;
  std::size_t seq_len = 0;
  std::vector<std::size_t> lengths;
};

enum class DecodeMode { kGreedy, kSample };

/// One shared encoder and one shared decoder; styles are distinguished only
/// by an additive style embedding at both inputs.
///
/// Layers are pre-norm: x + Attn(LN(x)), x + FFN(LN(x)), with a final
/// layer norm on each stack. Token and position tables are shared by the
/// encoder and decoder; the output projection is untied.
class StyleTransferModel {
 public:
  StyleTransferModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  ContentVectors encode(const Batch& batch, Style style);

  /// Teacher-forced decoding of `target` (rows must start with BOS).
  /// Returns logits [B, T-1, V]: row t predicts target token t+1 from target
  /// tokens 0..t and z.
  Tensor decode_teacher_forced(const ContentVectors& z, const Batch& target, Style style);

  /// Per-row greedy or seeded-sample generation; stops at EOS or after
  /// max_new[row] tokens. The result excludes BOS and EOS. Never records
  /// on the tape.
  std::vector<std::vector<TokenId>> generate(const ContentVectors& z, Style style,
                                             std::span<const std::size_t> max_new, DecodeMode mode,
                                             std::uint64_t seed = 0);
  std::vector<std::vector<TokenId>> generate(const ContentVectors& z, Style style, std::size_t max_new,
                                             DecodeMode mode, std::uint64_t seed = 0);

  /// Encoder followed by the output projection, for masked-LM training.
  Tensor mlm_logits(const Batch& stream, Style style);

  /// Copies encoder self-attention and feed-forward weights into the
  /// matching decoder sublayers (cross-attention keeps its init).
  void init_decoder_from_encoder();

  void set_training(bool training) { training_ = training; }

  /// All parameters in a fixed order.
  const ParameterList& parameters() const { return params_; }
  /// Embedding tables and the encoder stack.
  ParameterList encoder_parameters() const;
  /// Decoder stack and output projection.
  ParameterList decoder_parameters() const;

  Tensor& parameter(const std::string& name);

  /// Overwrites parameter values by name; every parameter must be present
  /// with a matching shape.
  void load_parameters(const ParameterList& values);

 private:
  struct Attention {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct FeedForward {
    Tensor w1, b1, w2, b2;
  };
  struct LayerNormParams {
    Tensor gain, bias;
  };
  struct EncoderLayer {
    LayerNormParams ln1, ln2;
    Attention self_attn;
    FeedForward ffn;
  };
  struct DecoderLayer {
    LayerNormParams ln1, ln2, ln3;
    Attention self_attn, cross_attn;
    FeedForward ffn;
  };

  Tensor embed(std::span<const TokenId> ids, std::size_t batch, std::size_t len, Style style);
  Tensor attention(const Attention& a, const Tensor& query, const Tensor& memory,
                   std::span<const std::uint8_t> keep, std::size_t batch, std::size_t q_len,
                   std::size_t k_len);
  Tensor feed_forward(const FeedForward& f, const Tensor& x);
  Tensor maybe_dropout(const Tensor& x);
  Tensor decode_ids(const ContentVectors& z, std::span<const TokenId> ids, std::span<const std::size_t> lengths,
                    std::size_t batch, std::size_t len, Style style);
  void check_style(Style style) const;

  ModelConfig config_;
  std::uint64_t init_seed_;
  std::uint64_t dropout_counter_ = 0;
  bool training_ = true;
  ParameterList params_;
  std::size_t n_encoder_params_ = 0;  // params_[0, n) belong to embeddings + encoder

  Tensor tok_emb_, pos_emb_, style_emb_;
  std::vector<EncoderLayer> enc_;
  LayerNormParams enc_final_;
  std::vector<DecoderLayer> dec_;
  LayerNormParams dec_final_;
  Tensor out_w_, out_b_;
};

/// Single-layer GRU over content vectors with a linear head producing the
/// logit of p(l1 | z). Only unmasked positions update the hidden state.
class Discriminator {
 public:
  Discriminator(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed);

  std::size_t input_size() const { return input_size_; }
  std::size_t hidden_size() const { return hidden_size_; }

  /// Logits [B, 1]. Throws DataError if any row has no unmasked position.
  Tensor logits(const ContentVectors& z);
  /// p(l1 | z) per batch row.
  std::vector<double> discriminate(const ContentVectors& z);

  const ParameterList& parameters() const { return params_; }
  Tensor& parameter(const std::string& name);
  void load_parameters(const ParameterList& values);

 private:
  std::size_t input_size_, hidden_size_;
  ParameterList params_;
  Tensor wz_, wr_, wh_, uz_, ur_, uh_, bz_, br_, bh_, head_w_, head_b_;
};

}  // namespace tweetnews::model
