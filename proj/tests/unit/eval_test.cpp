#include <algorithm>
#include <fstream>
#include <string>

#include "doctest.h"
#include "tweetnews/error.hpp"
#include "tweetnews/eval/metrics.hpp"
#include "tweetnews/numerics/rng.hpp"

using namespace tweetnews;
using namespace tweetnews::eval;

namespace {

const std::string kBleuDir = std::string(TWEETNEWS_FIXTURES) + "/bleu/";

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("bleu matches the multi-bleu oracle on the shared fixtures") {
  for (const char* name : {"identity", "zero4", "clipping", "brevity", "long"}) {
    CAPTURE(name);
    const auto expected = lines_of(kBleuDir + name + ".expected");
    REQUIRE(expected.size() == 1);
    const auto r = bleu_files(kBleuDir + name + ".hyp", kBleuDir + name + ".ref");
    CHECK(format_bleu(r) == expected[0]);
  }
}

TEST_CASE("bleu identity and zero cases") {
  const std::vector<std::string> c{"the cat sat on the mat", "a b c d e"};
  CHECK(bleu(c, c).score == 100.0);
  const auto r = bleu({"the the the"}, {"the cat"});
  CHECK(r.precisions[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(r.precisions[1] == 0.0);
  CHECK(r.score == 0.0);
  CHECK(r.brevity_penalty == 1.0);
  CHECK_THROWS_AS(bleu({"a"}, std::vector<std::string>{"a", "b"}), DataError);
}

TEST_CASE("bleu is case-sensitive and order-invariant") {
  CHECK(bleu({"The cat sat on the mat"}, {"the cat sat on the mat"}).score < 100.0);
  std::vector<std::string> hyp = lines_of(kBleuDir + "brevity.hyp");
  std::vector<std::string> ref = lines_of(kBleuDir + "brevity.ref");
  const double base = bleu(hyp, ref).score;
  std::reverse(hyp.begin(), hyp.end());
  std::reverse(ref.begin(), ref.end());
  CHECK(bleu(hyp, ref).score == doctest::Approx(base).epsilon(1e-12));
  hyp.push_back("officials confirmed the death toll on sunday .");
  ref.push_back("officials confirmed the death toll on sunday .");
  CHECK(bleu(hyp, ref).score >= base);
}

TEST_CASE("bleu brevity penalty hand computation") {
  // hyp 4 tokens, ref 6 tokens; all hypothesis n-grams match.
  const auto r = bleu({"a b c d"}, {"a b c d e f"});
  CHECK(r.brevity_penalty == doctest::Approx(std::exp(1.0 - 6.0 / 4.0)).epsilon(1e-15));
  CHECK(r.score == doctest::Approx(100.0 * std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("bleu multiple references take the closest length") {
  const auto r = bleu({"a b c d"}, std::vector<std::vector<std::string>>{{"a b c d e f g", "a b c"}});
  // |4-7| = 3 and |4-3| = 1: length 3 wins.
  CHECK(r.ref_len == 3);
  const auto tie = bleu({"a b c d"}, std::vector<std::vector<std::string>>{{"a b c d e", "a b c"}});
  CHECK(tie.ref_len == 3);
}

TEST_CASE("fleiss kappa fixtures") {
  // Exact rationals: 15/47 and 4211/20059.
  CHECK(fleiss_kappa({{{4, 0, 0}, {1, 2, 1}, {0, 1, 3}}}) == doctest::Approx(15.0 / 47.0).epsilon(1e-12));
  const RatingMatrix wiki{{{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0}, {2, 2, 8, 1, 1},
                           {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2}, {6, 5, 2, 1, 0}, {0, 2, 2, 3, 7}}};
  CHECK(std::abs(fleiss_kappa(wiki) - 4211.0 / 20059.0) < 1e-9);
}

TEST_CASE("fleiss kappa limits and errors") {
  CHECK(fleiss_kappa({{{3, 0}, {0, 3}, {3, 0}}}) == doctest::Approx(1.0));
  CHECK(fleiss_kappa({{{0, 5}, {0, 5}}}) == 1.0);
  CHECK_THROWS_AS(fleiss_kappa({{{1, 1}, {2, 1}}}), DataError);
  CHECK_THROWS_AS(fleiss_kappa({{{1, 0}, {1, 0}}}), DataError);
  CHECK_THROWS_AS(fleiss_kappa({}), DataError);
  // Relabelling categories leaves kappa unchanged.
  const double k1 = fleiss_kappa({{{4, 0, 0}, {1, 2, 1}, {0, 1, 3}}});
  const double k2 = fleiss_kappa({{{0, 0, 4}, {1, 2, 1}, {3, 1, 0}}});
  CHECK(k1 == doctest::Approx(k2).epsilon(1e-14));
}

TEST_CASE("fleiss kappa near zero for independent raters") {
  Rng rng(42);
  RatingMatrix m;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::size_t> row(2, 0);
    ++row[rng.below(2)];
    ++row[rng.below(2)];
    m.counts.push_back(row);
  }
  const double k = fleiss_kappa(m);
  CHECK(std::abs(k) < 0.05);
  CHECK(k >= -1.0);
}

TEST_CASE("welch t fixtures") {
  // t and df from exact rational moments; p from scipy.stats.t.sf.
  const std::vector<double> a{27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4};
  const std::vector<double> b{27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4};
  auto r = welch_t(a, b);
  CHECK(std::abs(r.t - -2.455356398286005) < 1e-9);
  CHECK(std::abs(r.df - 24.988529290231416) < 1e-9);
  CHECK(std::abs(r.p - 0.021378001462867013) < 1e-6);

  r = welch_t({3.1, 4.5, 2.2}, {10.5, 9.1, 14.8, 12.0, 30.2, 7.7});
  CHECK(std::abs(r.t - -3.1283501976981074) < 1e-9);
  CHECK(std::abs(r.df - 5.37867054914123) < 1e-9);
  CHECK(std::abs(r.p - 0.023567206830332962) < 1e-6);
}

TEST_CASE("student t tail probabilities") {
  CHECK(std::abs(student_t_two_sided(2.0, 1.0) - 0.2951672353008664) < 1e-9);
  CHECK(std::abs(student_t_two_sided(0.5, 3.0) - 0.651447964848151) < 1e-9);
  CHECK(std::abs(student_t_two_sided(5.0, 2.5) - 0.023451189970861843) < 1e-9);
  CHECK(std::abs(student_t_two_sided(1.96, 1000.0) - 0.05027318495574871) < 1e-9);
  CHECK(student_t_two_sided(0.0, 4.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(student_t_two_sided(-2.0, 1.0) == student_t_two_sided(2.0, 1.0));
}

TEST_CASE("welch t limits and errors") {
  auto r = welch_t({1, 2, 3}, {1, 2, 3});
  CHECK(r.t == 0.0);
  CHECK(r.p == doctest::Approx(1.0).epsilon(1e-12));
  r = welch_t({1, 2, 3}, {1001, 1002, 1003});
  CHECK(r.p < 0.001);
  CHECK_THROWS_AS(welch_t({1}, {1, 2}), DataError);
  r = welch_t({2, 2}, {3, 3});
  CHECK(r.p == 0.0);
}
