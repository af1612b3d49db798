#include "tweetnews/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tweetnews/error.hpp"
#include "tweetnews/numerics/ops.hpp"
#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::model {

namespace ops = numerics;

void ModelConfig::validate() const {
  auto fail = [](const std::string& why) { throw ConfigError("model config: " + why); };
  if (n_layers == 0) fail("n_layers must be positive");
  if (n_heads == 0 || d_model == 0 || d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (d_ff == 0) fail("d_ff must be positive");
  if (max_len < 2) fail("max_len must be at least 2");
  if (vocab_size <= static_cast<std::size_t>(tokenizer::kNumSpecials)) fail("vocab_size too small");
  if (n_styles < 2) fail("n_styles must be at least 2");
  if (dropout_p < 0.0 || dropout_p >= 1.0) fail("dropout_p must lie in [0, 1)");
}

std::vector<numerics::Tensor> tensors_of(const ParameterList& params) {
  std::vector<numerics::Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

namespace {

void load_by_name(ParameterList& dst, const ParameterList& src, const char* what) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& p : src) by_name[p.name] = &p.tensor;
  for (auto& p : dst) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw DataError(std::string(what) + ": missing parameter " + p.name);
    if (it->second->shape() != p.tensor.shape()) {
      throw DataError(std::string(what) + ": parameter " + p.name + " has shape " +
                      numerics::shape_str(it->second->shape()) + ", expected " +
                      numerics::shape_str(p.tensor.shape()));
    }
    auto values = it->second->data();
    std::copy(values.begin(), values.end(), p.tensor.mutable_data().begin());
  }
}

Tensor& find_param(ParameterList& params, const std::string& name) {
  for (auto& p : params) {
    if (p.name == name) return p.tensor;
  }
  throw ConfigError("no parameter named " + name);
}

// keep[b, h, i, j] for attention over key mask (and causal when requested).
std::vector<std::uint8_t> attention_keep(std::span<const std::uint8_t> key_mask, std::size_t batch,
                                         std::size_t heads, std::size_t q_len, std::size_t k_len,
                                         bool causal) {
  std::vector<std::uint8_t> keep(batch * heads * q_len * k_len);
  std::size_t idx = 0;
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < q_len; ++i)
        for (std::size_t j = 0; j < k_len; ++j)
          keep[idx++] = key_mask[b * k_len + j] && (!causal || j <= i);
  return keep;
}

}  // namespace

StyleTransferModel::StyleTransferModel(ModelConfig config, std::uint64_t seed)
    : config_(config), init_seed_(seed) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.d_model;
  const double emb_std = 1.0 / std::sqrt(static_cast<double>(d));
  auto normal_param = [&](const std::string& name, numerics::Shape shape, double stddev) {
    std::vector<double> v(numerics::shape_numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    auto t = Tensor::from(std::move(shape), std::move(v), true);
    params_.push_back({name, t});
    return t;
  };
  auto const_param = [&](const std::string& name, numerics::Shape shape, double value) {
    auto t = Tensor::full(std::move(shape), value, true);
    params_.push_back({name, t});
    return t;
  };
  auto ln = [&](const std::string& prefix) {
    return LayerNormParams{const_param(prefix + ".gain", {d}, 1.0), const_param(prefix + ".bias", {d}, 0.0)};
  };
  auto attn = [&](const std::string& prefix) {
    Attention a;
    a.wq = normal_param(prefix + ".wq", {d, d}, emb_std);
    a.bq = const_param(prefix + ".bq", {d}, 0.0);
    a.wk = normal_param(prefix + ".wk", {d, d}, emb_std);
    a.bk = const_param(prefix + ".bk", {d}, 0.0);
    a.wv = normal_param(prefix + ".wv", {d, d}, emb_std);
    a.bv = const_param(prefix + ".bv", {d}, 0.0);
    a.wo = normal_param(prefix + ".wo", {d, d}, emb_std);
    a.bo = const_param(prefix + ".bo", {d}, 0.0);
    return a;
  };
  auto ffn = [&](const std::string& prefix) {
    FeedForward f;
    f.w1 = normal_param(prefix + ".w1", {d, config_.d_ff}, emb_std);
    f.b1 = const_param(prefix + ".b1", {config_.d_ff}, 0.0);
    f.w2 = normal_param(prefix + ".w2", {config_.d_ff, d}, 1.0 / std::sqrt(static_cast<double>(config_.d_ff)));
    f.b2 = const_param(prefix + ".b2", {d}, 0.0);
    return f;
  };

  tok_emb_ = normal_param("tok_emb", {config_.vocab_size, d}, emb_std);
  pos_emb_ = normal_param("pos_emb", {config_.max_len, d}, emb_std);
  // Every style row starts from the same vector.
  {
    std::vector<double> row(d);
    for (auto& x : row) x = emb_std * rng.normal();
    std::vector<double> table;
    for (std::size_t s = 0; s < config_.n_styles; ++s) table.insert(table.end(), row.begin(), row.end());
    style_emb_ = Tensor::from({config_.n_styles, d}, std::move(table), true);
    params_.push_back({"style_emb", style_emb_});
  }
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    const std::string p = "enc." + std::to_string(i);
    EncoderLayer layer;
    layer.ln1 = ln(p + ".ln1");
    layer.self_attn = attn(p + ".self_attn");
    layer.ln2 = ln(p + ".ln2");
    layer.ffn = ffn(p + ".ffn");
    enc_.push_back(std::move(layer));
  }
  enc_final_ = ln("enc.final_ln");
  n_encoder_params_ = params_.size();
  for (std::size_t i = 0; i < config_.n_layers; ++i) {
    const std::string p = "dec." + std::to_string(i);
    DecoderLayer layer;
    layer.ln1 = ln(p + ".ln1");
    layer.self_attn = attn(p + ".self_attn");
    layer.ln2 = ln(p + ".ln2");
    layer.cross_attn = attn(p + ".cross_attn");
    layer.ln3 = ln(p + ".ln3");
    layer.ffn = ffn(p + ".ffn");
    dec_.push_back(std::move(layer));
  }
  dec_final_ = ln("dec.final_ln");
  out_w_ = normal_param("out.w", {d, config_.vocab_size}, 0.02);
  out_b_ = const_param("out.b", {config_.vocab_size}, 0.0);
}

void StyleTransferModel::check_style(Style style) const {
  const int s = static_cast<int>(style);
  if (s < 0 || static_cast<std::size_t>(s) >= config_.n_styles) {
    throw ConfigError("style id " + std::to_string(s) + " is not one of the model's styles");
  }
}

Tensor StyleTransferModel::maybe_dropout(const Tensor& x) {
  if (!training_ || config_.dropout_p <= 0.0) return x;
  return ops::dropout(x, config_.dropout_p, derive_seed(init_seed_, ++dropout_counter_));
}

Tensor StyleTransferModel::embed(std::span<const TokenId> ids, std::size_t batch, std::size_t len, Style style) {
  check_style(style);
  if (len > config_.max_len) {
    throw DataError("sequence of " + std::to_string(len) + " tokens exceeds max_len " +
                    std::to_string(config_.max_len));
  }
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                      std::to_string(config_.vocab_size));
    }
  }
  std::vector<TokenId> positions(len);
  for (std::size_t i = 0; i < len; ++i) positions[i] = static_cast<TokenId>(i);
  const TokenId style_id[] = {static_cast<TokenId>(style)};
  auto x = ops::embedding(tok_emb_, ids, {batch, len});
  x = ops::add(x, ops::embedding(pos_emb_, positions, {len}));
  x = ops::add(x, ops::embedding(style_emb_, style_id, {}));
  return maybe_dropout(x);
}

Tensor StyleTransferModel::attention(const Attention& a, const Tensor& query, const Tensor& memory,
                                     std::span<const std::uint8_t> keep, std::size_t batch,
                                     std::size_t q_len, std::size_t k_len) {
  const std::size_t d = config_.d_model, heads = config_.n_heads, dh = d / heads;
  auto split = [&](const Tensor& x, std::size_t len) {
    return ops::swap_axes12(ops::reshape(x, {batch, len, heads, dh}));
  };
  auto q = split(ops::add(ops::matmul(query, a.wq), a.bq), q_len);
  auto k = split(ops::add(ops::matmul(memory, a.wk), a.bk), k_len);
  auto v = split(ops::add(ops::matmul(memory, a.wv), a.bv), k_len);
  auto scores = ops::scale(ops::bmm(q, k, true), 1.0 / std::sqrt(static_cast<double>(dh)));
  auto probs = maybe_dropout(ops::masked_softmax(scores, keep));
  auto ctx = ops::reshape(ops::swap_axes12(ops::bmm(probs, v)), {batch, q_len, d});
  return ops::add(ops::matmul(ctx, a.wo), a.bo);
}

Tensor StyleTransferModel::feed_forward(const FeedForward& f, const Tensor& x) {
  auto h = ops::gelu(ops::add(ops::matmul(x, f.w1), f.b1));
  return ops::add(ops::matmul(maybe_dropout(h), f.w2), f.b2);
}

ContentVectors StyleTransferModel::encode(const Batch& batch, Style style) {
  const std::size_t B = batch.batch_size, S = batch.seq_len;
  if (B == 0 || S == 0) throw DataError("encode: empty batch");
  auto mask = batch.mask();
  auto keep = attention_keep(mask, B, config_.n_heads, S, S, false);
  auto x = embed(batch.ids, B, S, style);
  for (const auto& layer : enc_) {
    auto h = ops::layer_norm(x, layer.ln1.gain, layer.ln1.bias);
    x = ops::add(x, maybe_dropout(attention(layer.self_attn, h, h, keep, B, S, S)));
    h = ops::layer_norm(x, layer.ln2.gain, layer.ln2.bias);
    x = ops::add(x, maybe_dropout(feed_forward(layer.ffn, h)));
  }
  x = ops::layer_norm(x, enc_final_.gain, enc_final_.bias);
  return ContentVectors{x, std::move(mask), B, S, batch.lengths};
}

Tensor StyleTransferModel::decode_ids(const ContentVectors& z, std::span<const TokenId> ids,
                                      std::span<const std::size_t> lengths, std::size_t batch, std::size_t len,
                                      Style style) {
  if (z.batch_size != batch) {
    throw ShapeError("decode: content vectors have batch " + std::to_string(z.batch_size) + ", target has " +
                     std::to_string(batch));
  }
  std::vector<std::uint8_t> tmask(batch * len, 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < lengths[b]; ++t) tmask[b * len + t] = 1;
  }
  auto self_keep = attention_keep(tmask, batch, config_.n_heads, len, len, true);
  auto cross_keep = attention_keep(z.mask, batch, config_.n_heads, len, z.seq_len, false);
  auto x = embed(ids, batch, len, style);
  for (const auto& layer : dec_) {
    auto h = ops::layer_norm(x, layer.ln1.gain, layer.ln1.bias);
    x = ops::add(x, maybe_dropout(attention(layer.self_attn, h, h, self_keep, batch, len, len)));
    h = ops::layer_norm(x, layer.ln2.gain, layer.ln2.bias);
    x = ops::add(x, maybe_dropout(attention(layer.cross_attn, h, z.z, cross_keep, batch, len, z.seq_len)));
    h = ops::layer_norm(x, layer.ln3.gain, layer.ln3.bias);
    x = ops::add(x, maybe_dropout(feed_forward(layer.ffn, h)));
  }
  return x;
}

Tensor StyleTransferModel::decode_teacher_forced(const ContentVectors& z, const Batch& target, Style style) {
  const std::size_t B = target.batch_size, T = target.seq_len;
  if (T < 2) throw DataError("decode: target needs BOS plus at least one token");
  std::vector<TokenId> ids(B * (T - 1));
  std::vector<std::size_t> lengths(B);
  for (std::size_t b = 0; b < B; ++b) {
    if (target.lengths[b] < 2 || target.at(b, 0) != tokenizer::kBos) {
      throw DataError("decode: target row " + std::to_string(b) + " does not begin with BOS");
    }
    for (std::size_t t = 0; t + 1 < T; ++t) ids[b * (T - 1) + t] = target.at(b, t);
    lengths[b] = target.lengths[b] - 1;
  }
  auto h = decode_ids(z, ids, lengths, B, T - 1, style);
  h = ops::layer_norm(h, dec_final_.gain, dec_final_.bias);
  return ops::add(ops::matmul(h, out_w_), out_b_);
}

Tensor StyleTransferModel::mlm_logits(const Batch& stream, Style style) {
  auto z = encode(stream, style);
  return ops::add(ops::matmul(z.z, out_w_), out_b_);
}

std::vector<std::vector<TokenId>> StyleTransferModel::generate(const ContentVectors& z, Style style,
                                                               std::size_t max_new, DecodeMode mode,
                                                               std::uint64_t seed) {
  std::vector<std::size_t> per_row(z.batch_size, max_new);
  return generate(z, style, per_row, mode, seed);
}

std::vector<std::vector<TokenId>> StyleTransferModel::generate(const ContentVectors& z, Style style,
                                                               std::span<const std::size_t> max_new,
                                                               DecodeMode mode, std::uint64_t seed) {
  numerics::NoGradGuard no_grad;
  const bool was_training = training_;
  training_ = false;
  const std::size_t B = z.batch_size, V = config_.vocab_size;
  if (max_new.size() != B) throw ShapeError("generate: max_new has wrong length");
  std::vector<std::size_t> limit(max_new.begin(), max_new.end());
  std::size_t longest = 0;
  for (auto& l : limit) {
    if (l == 0) throw ConfigError("generate: max_new must be at least 1");
    l = std::min(l, config_.max_len);
    longest = std::max(longest, l);
  }
  Rng rng(seed);
  std::vector<std::vector<TokenId>> out(B);
  std::vector<bool> done(B, false);
  std::vector<TokenId> prefix(B, tokenizer::kBos);  // [B, len] row-major
  for (std::size_t len = 1; len <= longest; ++len) {
    std::vector<std::size_t> lengths(B, len);
    auto h = decode_ids(z, prefix, lengths, B, len, style);
    std::vector<std::size_t> last(B);
    for (std::size_t b = 0; b < B; ++b) last[b] = b * len + len - 1;
    h = ops::layer_norm(ops::take_rows(h, last), dec_final_.gain, dec_final_.bias);
    auto logits = ops::add(ops::matmul(h, out_w_), out_b_);
    const auto lv = logits.data();
    std::vector<TokenId> next(B, tokenizer::kPad);
    for (std::size_t b = 0; b < B; ++b) {
      const double* row = lv.data() + b * V;
      auto allowed = [](std::size_t id) {
        return id != static_cast<std::size_t>(tokenizer::kPad) && id != static_cast<std::size_t>(tokenizer::kBos) &&
               id != static_cast<std::size_t>(tokenizer::kMask);
      };
      TokenId pick = tokenizer::kEos;
      if (mode == DecodeMode::kGreedy) {
        double best = -INFINITY;
        for (std::size_t v = 0; v < V; ++v) {
          if (allowed(v) && row[v] > best) {
            best = row[v];
            pick = static_cast<TokenId>(v);
          }
        }
      } else {
        double mx = -INFINITY;
        for (std::size_t v = 0; v < V; ++v) {
          if (allowed(v)) mx = std::max(mx, row[v]);
        }
        double total = 0.0;
        for (std::size_t v = 0; v < V; ++v) {
          if (allowed(v)) total += std::exp(row[v] - mx);
        }
        double u = rng.uniform() * total;
        for (std::size_t v = 0; v < V; ++v) {
          if (!allowed(v)) continue;
          pick = static_cast<TokenId>(v);
          u -= std::exp(row[v] - mx);
          if (u < 0) break;
        }
      }
      next[b] = pick;
      if (done[b]) continue;
      if (pick == tokenizer::kEos) {
        done[b] = true;
      } else {
        out[b].push_back(pick);
        if (out[b].size() >= limit[b]) done[b] = true;
      }
    }
    if (std::all_of(done.begin(), done.end(), [](bool d) { return d; })) break;
    std::vector<TokenId> grown(B * (len + 1));
    for (std::size_t b = 0; b < B; ++b) {
      std::copy_n(prefix.begin() + static_cast<std::ptrdiff_t>(b * len), len,
                  grown.begin() + static_cast<std::ptrdiff_t>(b * (len + 1)));
      grown[b * (len + 1) + len] = next[b];
    }
    prefix = std::move(grown);
  }
  training_ = was_training;
  return out;
}

void StyleTransferModel::init_decoder_from_encoder() {
  auto copy = [](const Tensor& src, Tensor& dst) {
    auto s = src.data();
    std::copy(s.begin(), s.end(), dst.mutable_data().begin());
  };
  auto copy_attn = [&](const Attention& s, Attention& d) {
    copy(s.wq, d.wq); copy(s.bq, d.bq); copy(s.wk, d.wk); copy(s.bk, d.bk);
    copy(s.wv, d.wv); copy(s.bv, d.bv); copy(s.wo, d.wo); copy(s.bo, d.bo);
  };
  for (std::size_t i = 0; i < enc_.size(); ++i) {
    copy(enc_[i].ln1.gain, dec_[i].ln1.gain);
    copy(enc_[i].ln1.bias, dec_[i].ln1.bias);
    copy_attn(enc_[i].self_attn, dec_[i].self_attn);
    copy(enc_[i].ln2.gain, dec_[i].ln3.gain);
    copy(enc_[i].ln2.bias, dec_[i].ln3.bias);
    copy(enc_[i].ffn.w1, dec_[i].ffn.w1);
    copy(enc_[i].ffn.b1, dec_[i].ffn.b1);
    copy(enc_[i].ffn.w2, dec_[i].ffn.w2);
    copy(enc_[i].ffn.b2, dec_[i].ffn.b2);
  }
  copy(enc_final_.gain, dec_final_.gain);
  copy(enc_final_.bias, dec_final_.bias);
}

ParameterList StyleTransferModel::encoder_parameters() const {
  return {params_.begin(), params_.begin() + static_cast<std::ptrdiff_t>(n_encoder_params_)};
}

ParameterList StyleTransferModel::decoder_parameters() const {
  return {params_.begin() + static_cast<std::ptrdiff_t>(n_encoder_params_), params_.end()};
}

Tensor& StyleTransferModel::parameter(const std::string& name) { return find_param(params_, name); }

void StyleTransferModel::load_parameters(const ParameterList& values) { load_by_name(params_, values, "model"); }

Discriminator::Discriminator(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed)
    : input_size_(input_size), hidden_size_(hidden_size) {
  if (input_size == 0 || hidden_size == 0) throw ConfigError("discriminator sizes must be positive");
  Rng rng(seed);
  auto normal_param = [&](const std::string& name, numerics::Shape shape, double stddev) {
    std::vector<double> v(numerics::shape_numel(shape));
    for (auto& x : v) x = stddev * rng.normal();
    auto t = Tensor::from(std::move(shape), std::move(v), true);
    params_.push_back({name, t});
    return t;
  };
  auto zeros = [&](const std::string& name, numerics::Shape shape) {
    auto t = Tensor::zeros(std::move(shape), true);
    params_.push_back({name, t});
    return t;
  };
  const double in_std = 1.0 / std::sqrt(static_cast<double>(input_size));
  const double h_std = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  wz_ = normal_param("disc.wz", {input_size, hidden_size}, in_std);
  wr_ = normal_param("disc.wr", {input_size, hidden_size}, in_std);
  wh_ = normal_param("disc.wh", {input_size, hidden_size}, in_std);
  uz_ = normal_param("disc.uz", {hidden_size, hidden_size}, h_std);
  ur_ = normal_param("disc.ur", {hidden_size, hidden_size}, h_std);
  uh_ = normal_param("disc.uh", {hidden_size, hidden_size}, h_std);
  bz_ = zeros("disc.bz", {hidden_size});
  br_ = zeros("disc.br", {hidden_size});
  bh_ = zeros("disc.bh", {hidden_size});
  head_w_ = normal_param("disc.head_w", {hidden_size, 1}, h_std);
  head_b_ = zeros("disc.head_b", {1});
}

Tensor Discriminator::logits(const ContentVectors& z) {
  const std::size_t B = z.batch_size, S = z.seq_len, H = hidden_size_;
  if (z.z.rank() != 3 || z.z.dim(2) != input_size_) {
    throw ShapeError("discriminator: content vectors " + numerics::shape_str(z.z.shape()) +
                     " do not have width " + std::to_string(input_size_));
  }
  std::size_t longest = 0;
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t n = 0;
    for (std::size_t t = 0; t < S; ++t) {
      if (z.mask[b * S + t]) {
        ++n;
        longest = std::max(longest, t + 1);
      }
    }
    if (n == 0) throw DataError("discriminator: row " + std::to_string(b) + " is an empty sequence");
  }
  auto flat = ops::reshape(z.z, {B * S, input_size_});
  auto xz = ops::add(ops::matmul(flat, wz_), bz_);
  auto xr = ops::add(ops::matmul(flat, wr_), br_);
  auto xh = ops::add(ops::matmul(flat, wh_), bh_);
  auto h = Tensor::zeros({B, H});
  std::vector<std::size_t> rows(B);
  for (std::size_t t = 0; t < longest; ++t) {
    for (std::size_t b = 0; b < B; ++b) rows[b] = b * S + t;
    std::vector<double> m(B * H);
    for (std::size_t b = 0; b < B; ++b) std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(b * H), H, z.mask[b * S + t] ? 1.0 : 0.0);
    auto gate_z = ops::sigmoid(ops::add(ops::take_rows(xz, rows), ops::matmul(h, uz_)));
    auto gate_r = ops::sigmoid(ops::add(ops::take_rows(xr, rows), ops::matmul(h, ur_)));
    auto cand = ops::tanh(ops::add(ops::take_rows(xh, rows), ops::matmul(ops::mul(gate_r, h), uh_)));
    // h <- h + m * z * (cand - h)
    auto update = ops::mul(ops::mul(gate_z, ops::sub(cand, h)), Tensor::from({B, H}, std::move(m)));
    h = ops::add(h, update);
  }
  return ops::add(ops::matmul(h, head_w_), head_b_);
}

std::vector<double> Discriminator::discriminate(const ContentVectors& z) {
  numerics::NoGradGuard no_grad;
  auto p = ops::sigmoid(logits(z));
  return {p.data().begin(), p.data().end()};
}

Tensor& Discriminator::parameter(const std::string& name) { return find_param(params_, name); }

void Discriminator::load_parameters(const ParameterList& values) { load_by_name(params_, values, "discriminator"); }

}  // namespace tweetnews::model
