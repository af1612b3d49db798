#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "tweetnews/error.hpp"
#include "tweetnews/model/checkpoint.hpp"
#include "tweetnews/model/transformer.hpp"
#include "tweetnews/numerics/adam.hpp"
#include "tweetnews/numerics/ops.hpp"

using namespace tweetnews;
using namespace tweetnews::model;
namespace ops = tweetnews::numerics;
using datakit::pad_batch;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 8;
  c.d_ff = 16;
  c.max_len = 12;
  c.vocab_size = 14;
  return c;
}

datakit::Batch source_batch() {
  return pad_batch({{5, 6, 7, 8}, {9, 10}, {11, 12, 13}}, Style::kL1);
}

datakit::Batch target_batch() {
  return pad_batch({{tokenizer::kBos, 6, 7, tokenizer::kEos}, {tokenizer::kBos, 12, 13, 5, tokenizer::kEos},
                    {tokenizer::kBos, 9, tokenizer::kEos}},
                   Style::kL2);
}

// targets[b, t] = target token t+1, mask = real next token.
std::pair<std::vector<std::int32_t>, std::vector<std::uint8_t>> shifted(const datakit::Batch& t) {
  std::vector<std::int32_t> y;
  std::vector<std::uint8_t> m;
  for (std::size_t b = 0; b < t.batch_size; ++b) {
    for (std::size_t i = 0; i + 1 < t.seq_len; ++i) {
      y.push_back(t.at(b, i + 1));
      m.push_back(i + 1 < t.lengths[b]);
    }
  }
  return {y, m};
}

Tensor decoder_loss(StyleTransferModel& model, const datakit::Batch& src, const datakit::Batch& tgt) {
  auto z = model.encode(src, Style::kL1);
  auto logits = model.decode_teacher_forced(z, tgt, Style::kL2);
  auto [y, m] = shifted(tgt);
  return ops::cross_entropy(logits, y, m);
}

}  // namespace

TEST_CASE("encoder output shape and seed determinism") {
  StyleTransferModel a(tiny_config(), 7), b(tiny_config(), 7), c(tiny_config(), 8);
  auto src = source_batch();
  auto za = a.encode(src, Style::kL1);
  CHECK(za.z.shape() == ops::Shape{3, 4, 8});
  CHECK(za.z.data().size() == 96);
  auto zb = b.encode(src, Style::kL1);
  CHECK(std::equal(za.z.data().begin(), za.z.data().end(), zb.z.data().begin()));
  auto zc = c.encode(src, Style::kL1);
  CHECK_FALSE(std::equal(za.z.data().begin(), za.z.data().end(), zc.z.data().begin()));
}

TEST_CASE("style embeddings start identical and separate once they diverge") {
  StyleTransferModel m(tiny_config(), 3);
  auto src = source_batch();
  auto z1 = m.encode(src, Style::kL1).z.data();
  auto z2 = m.encode(src, Style::kL2).z.data();
  CHECK(std::vector<double>(z1.begin(), z1.end()) == std::vector<double>(z2.begin(), z2.end()));
  m.parameter("style_emb").mutable_data()[8] += 0.5;  // row 1, first feature
  auto z3 = m.encode(src, Style::kL2).z.data();
  CHECK(std::vector<double>(z1.begin(), z1.end()) != std::vector<double>(z3.begin(), z3.end()));
}

TEST_CASE("padding does not leak into real positions") {
  StyleTransferModel m(tiny_config(), 11);
  auto alone = m.encode(pad_batch({{9, 10}}, Style::kL1), Style::kL1);
  auto mixed = m.encode(pad_batch({{5, 6, 7, 8, 5}, {9, 10}}, Style::kL1), Style::kL1);
  auto a = alone.z.data();
  auto b = mixed.z.data();
  for (std::size_t i = 0; i < 2 * 8; ++i) CHECK(a[i] == doctest::Approx(b[5 * 8 + i]).epsilon(1e-12));
}

TEST_CASE("decoder is causal") {
  StyleTransferModel m(tiny_config(), 5);
  auto src = source_batch();
  auto z = m.encode(src, Style::kL1);
  auto t1 = pad_batch({{tokenizer::kBos, 6, 7, 8, tokenizer::kEos}}, Style::kL2);
  auto t2 = pad_batch({{tokenizer::kBos, 6, 7, 12, 13}}, Style::kL2);
  auto one = [&](const datakit::Batch& t) {
    auto zz = m.encode(pad_batch({src.row(0)}, Style::kL1), Style::kL1);
    return m.decode_teacher_forced(zz, t, Style::kL2);
  };
  auto l1 = one(t1), l2 = one(t2);
  CHECK(l1.shape() == ops::Shape{1, 4, 14});
  const std::size_t V = 14;
  // Positions 0..2 only see BOS 6 7; position 3 sees the differing token.
  for (std::size_t i = 0; i < 3 * V; ++i) CHECK(l1.data()[i] == doctest::Approx(l2.data()[i]).epsilon(1e-12));
  bool differs = false;
  for (std::size_t i = 3 * V; i < 4 * V; ++i) differs |= l1.data()[i] != l2.data()[i];
  CHECK(differs);
  (void)z;
}

TEST_CASE("untrained decoder loss is near ln V") {
  ModelConfig c = tiny_config();
  c.d_model = 32;
  c.d_ff = 64;
  c.vocab_size = 200;
  StyleTransferModel m(c, 1);
  auto src = pad_batch({{5, 60, 70, 80}, {90, 100}}, Style::kL1);
  auto tgt = pad_batch({{tokenizer::kBos, 6, 70, 150, tokenizer::kEos}, {tokenizer::kBos, 12, tokenizer::kEos}},
                       Style::kL2);
  auto loss = decoder_loss(m, src, tgt).item();
  CHECK(std::abs(loss - std::log(200.0)) < 0.1);
}

TEST_CASE("decoder input errors") {
  StyleTransferModel m(tiny_config(), 1);
  auto z = m.encode(source_batch(), Style::kL1);
  auto no_bos = pad_batch({{6, 7, tokenizer::kEos}, {6, 7}, {8, 9}}, Style::kL2);
  CHECK_THROWS_AS(m.decode_teacher_forced(z, no_bos, Style::kL2), DataError);
  std::vector<std::int32_t> long_row(13, 5);
  CHECK_THROWS_AS(m.encode(pad_batch({long_row}, Style::kL1), Style::kL1), DataError);
  CHECK_THROWS_AS(m.encode(pad_batch({{5, 99}}, Style::kL1), Style::kL1), DataError);
}

TEST_CASE("generation forced to EOS is empty and respects max_new") {
  StyleTransferModel m(tiny_config(), 2);
  auto z = m.encode(source_batch(), Style::kL1);
  const auto tape_before = ops::tape_size();
  auto gen = m.generate(z, Style::kL2, 5, DecodeMode::kGreedy);
  CHECK(ops::tape_size() == tape_before);
  REQUIRE(gen.size() == 3);
  for (const auto& g : gen) CHECK(g.size() <= 5);
  std::vector<std::size_t> limits{1, 2, 3};
  m.parameter("out.b").mutable_data()[tokenizer::kEos] = -1e3;
  auto capped = m.generate(z, Style::kL2, limits, DecodeMode::kGreedy);
  for (std::size_t b = 0; b < 3; ++b) CHECK(capped[b].size() == limits[b]);
  m.parameter("out.b").mutable_data()[tokenizer::kEos] = 1e3;
  for (const auto& g : m.generate(z, Style::kL2, 5, DecodeMode::kGreedy)) CHECK(g.empty());
  ops::clear_tape();
}

TEST_CASE("sampling is reproducible under a seed and never emits PAD, BOS or MASK") {
  StyleTransferModel m(tiny_config(), 4);
  m.parameter("out.b").mutable_data()[tokenizer::kEos] = -1e3;
  auto z = m.encode(source_batch(), Style::kL1);
  auto a = m.generate(z, Style::kL2, 8, DecodeMode::kSample, 99);
  auto b = m.generate(z, Style::kL2, 8, DecodeMode::kSample, 99);
  CHECK(a == b);
  for (const auto& row : a)
    for (auto id : row) {
      CHECK(id != tokenizer::kPad);
      CHECK(id != tokenizer::kBos);
      CHECK(id != tokenizer::kMask);
    }
}

TEST_CASE("parameter groups partition the model and share embeddings") {
  StyleTransferModel m(tiny_config(), 6);
  auto enc = m.encoder_parameters();
  auto dec = m.decoder_parameters();
  CHECK(enc.size() + dec.size() == m.parameters().size());
  CHECK(enc.front().name == "tok_emb");
  CHECK(dec.back().name == "out.b");
  // Decoder-only loss reaches the shared token table.
  auto tgt = target_batch();
  ops::Tensor z0 = ops::Tensor::zeros({3, 4, 8});
  ContentVectors z{z0, source_batch().mask(), 3, 4, source_batch().lengths};
  auto logits = m.decode_teacher_forced(z, tgt, Style::kL2);
  auto [y, mk] = shifted(tgt);
  ops::backward(ops::cross_entropy(logits, y, mk));
  const auto g = m.parameter("tok_emb").grad();
  CHECK(std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; }));
}

TEST_CASE("decoder initialised from encoder copies matching sublayers") {
  StyleTransferModel m(tiny_config(), 9);
  m.init_decoder_from_encoder();
  for (const char* s : {"self_attn.wq", "self_attn.bo", "ffn.w1", "ffn.b2"}) {
    auto e = m.parameter(std::string("enc.1.") + s).data();
    auto d = m.parameter(std::string("dec.1.") + s).data();
    CHECK(std::equal(e.begin(), e.end(), d.begin()));
  }
  auto ca = m.parameter("dec.0.cross_attn.wq").data();
  auto sa = m.parameter("dec.0.self_attn.wq").data();
  CHECK_FALSE(std::equal(ca.begin(), ca.end(), sa.begin()));
}

TEST_CASE("finite differences agree with backprop through transformer and GRU") {
  StyleTransferModel m(tiny_config(), 21);
  Discriminator d(8, 5, 22);
  // Perturb style rows and biases so no gradient is trivially symmetric.
  for (auto& p : m.parameters()) {
    auto t = p.tensor;
    auto v = t.mutable_data();
    tweetnews::Rng rng(tweetnews::derive_seed(5, p.name));
    for (auto& x : v) x += 0.05 * rng.normal();
  }
  auto src = source_batch();
  auto tgt = target_batch();
  const std::vector<double> labels{1, 0, 1};
  auto loss_fn = [&] {
    auto z = m.encode(src, Style::kL1);
    auto rec = decoder_loss(m, src, tgt);
    auto adv = ops::bce_with_logits(d.logits(z), labels);
    return ops::add(rec, adv);
  };
  auto params = tensors_of(m.parameters());
  for (auto& t : tensors_of(d.parameters())) params.push_back(t);
  auto r = testutil::gradcheck(params, loss_fn, 1e-5, 7);
  INFO(r.worst);
  CHECK(r.checked > 500);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("discriminator separates two clusters of content vectors") {
  Discriminator d(4, 16, 3);
  tweetnews::Rng rng(17);
  auto make = [&](double centre, std::size_t n) {
    std::vector<double> v(n * 3 * 4);
    for (auto& x : v) x = centre + 0.5 * rng.normal();
    ContentVectors z{ops::Tensor::from({n, 3, 4}, v), std::vector<std::uint8_t>(n * 3, 1), n, 3,
                     std::vector<std::size_t>(n, 3)};
    return z;
  };
  auto state = ops::make_adam_state(tensors_of(d.parameters()), {.learning_rate = 1e-2});
  auto params = tensors_of(d.parameters());
  for (int step = 0; step < 200; ++step) {
    auto a = make(1.0, 16), b = make(-1.0, 16);
    std::vector<double> ones(16, 1.0), zeros(16, 0.0);
    auto loss = ops::add(ops::bce_with_logits(d.logits(a), ones), ops::bce_with_logits(d.logits(b), zeros));
    ops::backward(loss);
    ops::adam_step(params, state);
  }
  auto pa = d.discriminate(make(1.0, 100));
  auto pb = d.discriminate(make(-1.0, 100));
  int correct = 0;
  for (double p : pa) correct += p > 0.5;
  for (double p : pb) correct += p < 0.5;
  CHECK(correct / 200.0 >= 0.95);
  ContentVectors empty{ops::Tensor::zeros({1, 2, 4}), {0, 0}, 1, 2, {0}};
  CHECK_THROWS_AS(d.logits(empty), DataError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  auto dir = std::filesystem::temp_directory_path() / "tweetnews_ckpt_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "m.sfck";
  StyleTransferModel m(tiny_config(), 31);
  Discriminator d(8, 6, 32);
  save_model(path, m, &d);
  auto ck = load_checkpoint(path);
  CHECK(ck.config == m.config());
  auto m2 = model_from_checkpoint(ck);
  REQUIRE(m2.parameters().size() == m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    auto a = m.parameters()[i].tensor.data(), b = m2.parameters()[i].tensor.data();
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
  auto d2 = discriminator_from_checkpoint(ck);
  REQUIRE(d2.has_value());
  CHECK(d2->hidden_size() == 6);
  auto z = m.encode(source_batch(), Style::kL1);
  CHECK(d.discriminate(z) == d2->discriminate(z));

  // Truncation and corruption are reported, not silently accepted.
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(dir / "short.sfck", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 3));
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "short.sfck"), DataError);
  bytes[0] = 'x';
  {
    std::ofstream out(dir / "bad.sfck", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.sfck"), DataError);
  std::filesystem::remove_all(dir);
}
