#include <algorithm>
#include <array>
#include <cstring>
#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "tweetnews/error.hpp"
#include "tweetnews/numerics/ops.hpp"
#include "tweetnews/objectives/objectives.hpp"

using namespace tweetnews;
using namespace tweetnews::objectives;
namespace ops = tweetnews::numerics;
using datakit::pad_batch;
using model::ModelConfig;

namespace {

const std::vector<std::string> kTweets = {
    "omg huge quake in nepal #prayfornepal", "flood water everywhere stay safe",
    "cyclone coming to odisha tonight", "so many ppl hurt in the fire smh"};
const std::vector<std::string> kNews = {
    "a powerful earthquake struck nepal on saturday", "flood waters rose across the region",
    "a cyclone is expected to reach odisha tonight", "dozens of people were injured in the fire"};

const tokenizer::Vocab& vocab() {
  static const tokenizer::Vocab v = [] {
    std::string corpus;
    for (const auto& s : kTweets) corpus += s + "\n";
    for (const auto& s : kNews) corpus += s + "\n";
    return tokenizer::Vocab::train(corpus, 90);
  }();
  return v;
}

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 16;
  c.d_ff = 32;
  c.max_len = 48;
  c.vocab_size = vocab().size();
  return c;
}

Batch batch_of(const std::vector<std::string>& lines, Style s) {
  return datakit::make_batches(lines, vocab(), lines.size(), s, 48).front();
}

std::uint64_t hash_params(const model::ParameterList& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : params) {
    for (double v : p.tensor.data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = (h ^ bits) * 1099511628211ull;
    }
  }
  return h;
}

numerics::AdamConfig lr(double v) {
  numerics::AdamConfig c;
  c.learning_rate = v;
  return c;
}

// Evaluates `loss` before each of `steps` calls to `step` and once after.
std::vector<double> trace(const std::function<double()>& loss, const std::function<void()>& step, int steps) {
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) {
    {
      ops::NoGradGuard g;
      out.push_back(loss());
    }
    step();
  }
  ops::NoGradGuard g;
  out.push_back(loss());
  return out;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

TEST_CASE("mlm mask with zero selection is the identity") {
  std::vector<TokenId> s{5, 6, 7, 8, 9};
  MlmSpec spec;
  spec.select_p = 0.0;
  auto ex = apply_mlm_mask(s, spec, 20, 1);
  CHECK(ex.tokens == s);
  CHECK(ex.positions.empty());
  CHECK_THROWS_AS(apply_mlm_mask(std::vector<TokenId>{}, MlmSpec{}, 20, 1), DataError);
}

TEST_CASE("mlm selection and replacement proportions over 100k tokens") {
  const std::size_t V = 500;
  std::vector<TokenId> stream(256);
  std::size_t total = 0, selected = 0, masked = 0, random = 0, kept = 0;
  for (std::uint64_t w = 0; total < 100000; ++w) {
    Rng rng(w);
    for (auto& t : stream) t = static_cast<TokenId>(tokenizer::kNumSpecials + rng.below(V - tokenizer::kNumSpecials));
    auto ex = apply_mlm_mask(stream, MlmSpec{}, V, derive_seed(3, w));
    total += stream.size();
    selected += ex.positions.size();
    for (std::size_t k = 0; k < ex.positions.size(); ++k) {
      const auto now = ex.tokens[ex.positions[k]];
      if (now == tokenizer::kMask) {
        ++masked;
      } else if (now == ex.originals[k]) {
        ++kept;  // includes random draws that hit the original (~0.02% of selections)
      } else {
        ++random;
      }
    }
    // Unselected positions are untouched.
    std::size_t changed = 0;
    for (std::size_t i = 0; i < stream.size(); ++i) changed += ex.tokens[i] != stream[i];
    CHECK(changed <= ex.positions.size());
  }
  const double sel = static_cast<double>(selected) / total;
  CHECK(std::abs(sel - 0.15) < 0.01);
  CHECK(std::abs(static_cast<double>(masked) / selected - 0.8) < 0.02);
  CHECK(std::abs(static_cast<double>(random) / selected - 0.1) < 0.02);
  CHECK(std::abs(static_cast<double>(kept) / selected - 0.1) < 0.02);
  auto a = apply_mlm_mask(stream, MlmSpec{}, V, 11), b = apply_mlm_mask(stream, MlmSpec{}, V, 11);
  CHECK(a.tokens == b.tokens);
  CHECK(a.positions == b.positions);
}

TEST_CASE("noise C identity, degenerate drop and bounded displacement") {
  NoiseSpec none{0.0, 0.0, 1};
  auto x = pad_batch({{tokenizer::kBos, 5, 6, 7, tokenizer::kEos}}, Style::kL1);
  CHECK(noise_C(x, none, 1).ids == x.ids);

  NoiseSpec drop_all{0.0, 1.0, 3};
  auto d = noise_C(x, drop_all, 1);
  CHECK(d.row(0) == std::vector<TokenId>{tokenizer::kBos, tokenizer::kUnk, tokenizer::kEos});

  NoiseSpec shuffle{0.0, 0.0, 3};
  std::vector<TokenId> ids(1000);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>(i);
  Rng rng(4);
  auto out = noise_tokens(ids, shuffle, rng);
  REQUIRE(out.size() == ids.size());
  long worst = 0;
  std::size_t moved = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    worst = std::max(worst, std::labs(static_cast<long>(out[i]) - static_cast<long>(i)));
    moved += out[i] != static_cast<TokenId>(i);
  }
  CHECK(worst <= 2);
  CHECK(moved > 100);

  NoiseSpec masky{0.5, 0.0, 1};
  Rng r2(9);
  auto m = noise_tokens(ids, masky, r2);
  std::size_t masks = std::count(m.begin(), m.end(), tokenizer::kMask);
  CHECK(masks > 400);
  CHECK(masks < 600);
}

TEST_CASE("untrained losses sit near ln V") {
  StyleTransferModel m(small_config(), 1);
  const double lnv = std::log(static_cast<double>(vocab().size()));
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  ops::NoGradGuard g;
  CHECK(std::abs(denoise_loss(m, x, y, NoiseSpec{}, 3).item() / (2 * lnv) - 1) < 0.1);
  corruptor::CorruptionSpec cs;
  cs.hashtag_pool = {"#news"};
  corruptor::Corruptor H(cs);
  CHECK(std::abs(synthetic_loss(m, vocab(), kNews, H, 5).item() / lnv - 1) < 0.1);
}

TEST_CASE("identity corruptor turns L_syn into clean cross-style reconstruction") {
  StyleTransferModel m(small_config(), 6);
  corruptor::CorruptionSpec zero;
  zero.spell_p = zero.ne_hashtag_p = zero.random_hashtag_p = zero.synonym_p = zero.function_drop_p = 0.0;
  corruptor::Corruptor H(zero);
  ops::NoGradGuard g;
  auto y = batch_of(kNews, Style::kL2);
  const double syn = synthetic_loss(m, vocab(), kNews, H, 1).item();
  CHECK(syn == seq2seq_loss(m, y, Style::kL1, y, Style::kL2).item());
}

TEST_CASE("adversarial loss is exactly the negated discriminator loss") {
  StyleTransferModel m(small_config(), 2);
  model::Discriminator d(16, 8, 3);
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  const double ld = discriminator_loss(m, d, x, y).item();
  const double ladv = adversarial_loss(m, d, x, y).item();
  CHECK(ladv + ld == 0.0);
  CHECK(std::abs(ladv + ld) <= 1e-12);
  ops::clear_tape();
}

TEST_CASE("flat discriminator gives 2 ln 2 and no encoder gradient") {
  StyleTransferModel m(small_config(), 2);
  model::Discriminator d(16, 8, 3);
  for (const char* n : {"disc.head_w", "disc.head_b"}) {
    for (auto& v : d.parameter(n).mutable_data()) v = 0.0;
  }
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  CHECK(discriminator_loss(m, d, x, y).item() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-15));
  ops::clear_tape();
  ops::backward(adversarial_loss(m, d, x, y));
  for (const auto& p : m.encoder_parameters()) {
    for (double g : p.tensor.grad()) REQUIRE(g == 0.0);
  }
}

TEST_CASE("each step touches only its parameter set") {
  StyleTransferModel m(small_config(), 4);
  model::Discriminator d(16, 8, 5);
  Trainer t(m, &d, lr(1e-3), lr(1e-3));
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  auto snapshot = [&] {
    return std::array<std::uint64_t, 3>{hash_params(m.encoder_parameters()), hash_params(m.decoder_parameters()),
                                        hash_params(d.parameters())};
  };
  auto before = snapshot();
  t.step_discriminator(x, y);
  auto after = snapshot();
  CHECK(after[0] == before[0]);
  CHECK(after[1] == before[1]);
  CHECK(after[2] != before[2]);

  before = after;
  t.step_adversarial(x, y);
  after = snapshot();
  CHECK(after[0] != before[0]);
  CHECK(after[1] == before[1]);
  CHECK(after[2] == before[2]);

  before = after;
  t.step_denoise(x, y, NoiseSpec{}, 1);
  after = snapshot();
  CHECK(after[0] != before[0]);
  CHECK(after[1] != before[1]);
  CHECK(after[2] == before[2]);
  CHECK(ops::tape_size() == 0);
}

TEST_CASE("ten small steps on a fixed batch decrease every objective") {
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  corruptor::CorruptionSpec cs;
  cs.hashtag_pool = {"#news"};
  corruptor::Corruptor H(cs);
  const NoiseSpec noise;
  const auto run = [&](const char* name, auto&& loss_fn, auto&& step_fn, StyleTransferModel& m) {
    (void)m;
    auto v = trace(loss_fn, step_fn, 10);
    INFO(name);
    CHECK(strictly_decreasing(v));
  };
  {
    StyleTransferModel m(small_config(), 10);
    Trainer t(m, nullptr, lr(1e-3), lr(1e-3));
    run("L_rec", [&] { return denoise_loss(m, x, y, noise, 7).item(); },
        [&] { t.step_denoise(x, y, noise, 7); }, m);
  }
  {
    StyleTransferModel m(small_config(), 11);
    Trainer t(m, nullptr, lr(1e-3), lr(1e-3));
    run("L_syn", [&] { return synthetic_loss(m, vocab(), kNews, H, 7).item(); },
        [&] { t.step_synthetic(vocab(), kNews, H, 7); }, m);
  }
  {
    StyleTransferModel m(small_config(), 12);
    Trainer t(m, nullptr, lr(1e-3), lr(1e-3));
    auto props = batch_of({"a cyclone is expected. it will reach odisha tonight.",
                           "people were injured. it happened in the fire."},
                          Style::kProposition);
    auto sents = batch_of({kNews[2], kNews[3]}, Style::kSentence);
    run("L_m", [&] { return merge_loss(m, props, sents).item(); }, [&] { t.step_merge(props, sents); }, m);
  }
  {
    StyleTransferModel m(small_config(), 13);
    model::Discriminator d(16, 8, 14);
    Trainer t(m, &d, lr(1e-3), lr(1e-3));
    run("L_D", [&] { return discriminator_loss(m, d, x, y).item(); }, [&] { t.step_discriminator(x, y); }, m);
    run("L_adv", [&] { return adversarial_loss(m, d, x, y).item(); }, [&] { t.step_adversarial(x, y); }, m);
  }
  {
    StyleTransferModel m(small_config(), 15);
    Trainer t(m, nullptr, lr(1e-3), lr(1e-3));
    auto v = trace([&] { return backtranslate_loss(m, x, y).loss->item(); },
                   [&] { t.step_backtranslate(x, y); }, 10);
    INFO("L_bt");
    CHECK(v.back() < v.front());
  }
  ops::clear_tape();
}

TEST_CASE("back-translation stops gradients at the generation pass") {
  StyleTransferModel m(small_config(), 20);
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  auto bt = backtranslate_loss(m, x, y);
  REQUIRE(bt.loss);
  ops::backward(*bt.loss);
  std::map<std::string, std::vector<double>> via_bt;
  for (const auto& p : m.parameters()) via_bt[p.name] = p.tensor.grad();
  for (const auto& p : m.parameters()) {
    auto t = p.tensor;
    t.zero_grad();
  }
  // Replay with the synthetic sources frozen as plain data.
  auto direction = [&](const Batch& src, Style from, Style to) {
    std::vector<std::vector<TokenId>> syn;
    {
      ops::NoGradGuard g;
      auto z = m.encode(src, from);
      std::vector<std::size_t> max_new;
      for (auto len : src.lengths) max_new.push_back((3 * (len - 2) + 1) / 2);
      for (auto& row : m.generate(z, to, max_new, model::DecodeMode::kGreedy)) syn.push_back(datakit::frame(row));
    }
    return seq2seq_loss(m, pad_batch(syn, to), to, src, from);
  };
  auto first = direction(x, Style::kL1, Style::kL2);
  auto second = direction(y, Style::kL2, Style::kL1);
  ops::backward(ops::add(first, second));
  for (const auto& p : m.parameters()) {
    const auto g = p.tensor.grad();
    const auto& ref = via_bt[p.name];
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(g[i] == ref[i]);
  }
}

TEST_CASE("empty back-translations are skipped and counted") {
  StyleTransferModel m(small_config(), 21);
  m.parameter("out.b").mutable_data()[tokenizer::kEos] = 1e3;
  Trainer t(m, nullptr, lr(1e-3), lr(1e-3));
  auto x = batch_of(kTweets, Style::kL1), y = batch_of(kNews, Style::kL2);
  const auto before = hash_params(m.parameters());
  std::size_t skipped = 0;
  CHECK_FALSE(t.step_backtranslate(x, y, &skipped).has_value());
  CHECK(skipped == 8);
  CHECK(hash_params(m.parameters()) == before);
}

TEST_CASE("merge sources over the token limit are rejected") {
  ModelConfig c = small_config();
  c.max_len = 600;
  StyleTransferModel m(c, 1);
  std::vector<TokenId> long_src(513, 6);
  auto props = pad_batch({datakit::frame(long_src)}, Style::kProposition);
  auto sents = pad_batch({{tokenizer::kBos, 6, tokenizer::kEos}}, Style::kSentence);
  CHECK_THROWS_AS(merge_loss(m, props, sents), DataError);
}

TEST_CASE("schedule order, filtering and determinism") {
  TrainingData data{kTweets, kNews, {}};
  corruptor::CorruptionSpec cs;
  cs.hashtag_pool = {"#news"};
  corruptor::Corruptor H(cs);
  auto run = [&](std::vector<Objective> objs, std::size_t cycles, std::size_t every = 0,
                 std::vector<std::size_t>* checkpoints = nullptr) {
    StyleTransferModel m(small_config(), 30);
    model::Discriminator d(16, 8, 31);
    Trainer t(m, &d, lr(1e-4), lr(1e-4));
    ScheduleSpec spec;
    spec.objectives = std::move(objs);
    spec.cycles = cycles;
    spec.batch_size = 2;
    spec.seed = 99;
    spec.checkpoint_every = every;
    ScheduleHooks hooks;
    if (checkpoints) hooks.on_checkpoint = [&](std::size_t c) { checkpoints->push_back(c); };
    std::vector<std::string> lines;
    for (const auto& r : run_schedule(spec, t, vocab(), data, &H, hooks)) lines.push_back(to_json_line(r));
    return lines;
  };
  auto only_rec = run({Objective::kRec}, 3);
  CHECK(only_rec.size() == 3);
  for (const auto& l : only_rec) CHECK(l.find("\"L_rec\"") != std::string::npos);

  std::vector<std::size_t> cps;
  auto full = run({Objective::kSyn, Objective::kAdv, Objective::kDis, Objective::kBt, Objective::kRec}, 3, 2, &cps);
  REQUIRE(full.size() == 15);
  const char* expected[] = {"L_rec", "L_bt", "L_D", "L_adv", "L_syn"};
  for (std::size_t i = 0; i < 15; ++i) {
    CHECK(full[i].find(std::string("\"") + expected[i % 5] + "\"") != std::string::npos);
    CHECK(full[i].find("\"step\":" + std::to_string(i) + ",") != std::string::npos);
  }
  CHECK(cps == std::vector<std::size_t>{2});
  CHECK(full == run({Objective::kRec, Objective::kBt, Objective::kDis, Objective::kAdv, Objective::kSyn}, 3));
  CHECK_THROWS_AS(run({}, 1), ConfigError);
}

TEST_CASE("data cursor visits every item once per epoch") {
  DataCursor c(5, 1);
  auto a = c.next(5);
  std::sort(a.begin(), a.end());
  CHECK(a == std::vector<std::size_t>{0, 1, 2, 3, 4});
  auto b = c.next(7);
  CHECK(c.epoch() == 2);
  CHECK_THROWS_AS(DataCursor(0, 1), DataError);
}

TEST_CASE("objective names round trip") {
  for (auto o : {Objective::kRec, Objective::kBt, Objective::kDis, Objective::kAdv, Objective::kSyn,
                 Objective::kMerge, Objective::kMlm}) {
    CHECK(parse_objective(objective_name(o)) == o);
  }
  CHECK(parse_objective("adv") == Objective::kAdv);
  CHECK_THROWS_AS(parse_objective("nope"), ConfigError);
}
