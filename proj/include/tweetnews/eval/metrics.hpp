#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace tweetnews::eval {

struct BleuReport {
  std::array<double, 4> precisions{};  // modified n-gram precisions, fractions
  double brevity_penalty = 0.0;
  double score = 0.0;  // 0..100
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  double ratio = 0.0;
};

/// Corpus BLEU with the Moses multi-bleu conventions: whitespace tokens,
/// case-sensitive, clipped counts, closest reference length (ties to the
/// shorter), no smoothing. Throws DataError on a corpus size mismatch.
BleuReport bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);
/// One inner vector of references per hypothesis line.
BleuReport bleu(const std::vector<std::string>& hypotheses, const std::vector<std::vector<std::string>>& references);

/// `BLEU = S, p1/p2/p3/p4 (BP=.., ratio=.., hyp_len=.., ref_len=..)`
std::string format_bleu(const BleuReport& r);

/// Reads both files line by line. Throws DataError on unreadable files.
BleuReport bleu_files(const std::filesystem::path& hypotheses, const std::filesystem::path& references);

/// N subjects x K categories of rating counts, every row summing to the
/// same number of raters.
struct RatingMatrix {
  std::vector<std::vector<std::size_t>> counts;
};

/// Fleiss' kappa. When expected agreement is 1 (every rating in one
/// category) the result is 1.0; throws DataError for ragged rows, rows with
/// different rater counts, fewer than two raters or an empty matrix.
double fleiss_kappa(const RatingMatrix& m);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Welch's unequal-variance t-test. Throws DataError when either sample has
/// fewer than two values.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

/// Two-sided tail P(|T| >= |t|) for Student's t with df > 0 degrees of
/// freedom, by adaptive Simpson integration.
double student_t_two_sided(double t, double df);

}  // namespace tweetnews::eval
