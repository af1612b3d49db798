#include "tweetnews/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "tweetnews/error.hpp"

namespace tweetnews::eval {

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& toks, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return out;
}

// multi-bleu returns a huge negative log for a zero precision.
double safe_log(double x) { return x > 0.0 ? std::log(x) : -9999999999.0; }

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

BleuReport bleu(const std::vector<std::string>& hypotheses, const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.size() != references.size()) {
    throw DataError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                    std::to_string(references.size()) + " references");
  }
  std::array<double, 4> correct{}, total{};
  BleuReport r;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = words(hypotheses[s]);
    r.hyp_len += hyp.size();
    std::vector<std::vector<std::string>> refs;
    for (const auto& ref : references[s]) refs.push_back(words(ref));
    if (refs.empty()) throw DataError("bleu: line " + std::to_string(s + 1) + " has no reference");
    std::size_t closest_len = 0, closest_diff = 0;
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const auto len = refs[j].size();
      const auto diff = len > hyp.size() ? len - hyp.size() : hyp.size() - len;
      if (j == 0 || diff < closest_diff || (diff == closest_diff && len < closest_len)) {
        closest_diff = diff;
        closest_len = len;
      }
    }
    r.ref_len += closest_len;
    for (std::size_t n = 1; n <= 4; ++n) {
      NgramCounts ref_max;
      for (const auto& ref : refs) {
        for (const auto& [g, c] : ngrams(ref, n)) ref_max[g] = std::max(ref_max[g], c);
      }
      for (const auto& [g, c] : ngrams(hyp, n)) {
        total[n - 1] += static_cast<double>(c);
        auto it = ref_max.find(g);
        if (it != ref_max.end()) correct[n - 1] += static_cast<double>(std::min(c, it->second));
      }
    }
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] = total[n] > 0.0 ? correct[n] / total[n] : 0.0;
    log_sum += safe_log(r.precisions[n]);
  }
  if (r.ref_len == 0 || r.hyp_len == 0) {
    // multi-bleu aborts here; report an all-zero score instead.
    r.brevity_penalty = 0.0;
    r.score = 0.0;
    return r;
  }
  const double h = static_cast<double>(r.hyp_len), ref = static_cast<double>(r.ref_len);
  r.brevity_penalty = h < ref ? std::exp(1.0 - ref / h) : 1.0;
  r.ratio = h / ref;
  r.score = 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

BleuReport bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back({r});
  return bleu(hypotheses, refs);
}

std::string format_bleu(const BleuReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                r.score, 100 * r.precisions[0], 100 * r.precisions[1], 100 * r.precisions[2], 100 * r.precisions[3],
                r.brevity_penalty, r.ratio, r.hyp_len, r.ref_len);
  return buf;
}

BleuReport bleu_files(const std::filesystem::path& hypotheses, const std::filesystem::path& references) {
  return bleu(read_lines(hypotheses), read_lines(references));
}

double fleiss_kappa(const RatingMatrix& m) {
  if (m.counts.empty() || m.counts.front().empty()) throw DataError("fleiss_kappa: empty rating matrix");
  const std::size_t k = m.counts.front().size();
  std::size_t raters = 0;
  for (auto c : m.counts.front()) raters += c;
  if (raters < 2) throw DataError("fleiss_kappa: need at least two raters per subject");
  const double n = static_cast<double>(raters);
  const double subjects = static_cast<double>(m.counts.size());
  std::vector<double> col(k, 0.0);
  double p_bar = 0.0;
  for (std::size_t i = 0; i < m.counts.size(); ++i) {
    const auto& row = m.counts[i];
    if (row.size() != k) throw DataError("fleiss_kappa: row " + std::to_string(i) + " has a different category count");
    std::size_t sum = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      sum += row[j];
      sq += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      col[j] += static_cast<double>(row[j]);
    }
    if (sum != raters) throw DataError("fleiss_kappa: row " + std::to_string(i) + " does not sum to " + std::to_string(raters));
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= subjects;
  double p_e = 0.0;
  for (double c : col) {
    const double p = c / (subjects * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    // Only reachable when every rating is in one category, i.e. perfect agreement.
    return 1.0;
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(F f, double a, double b, double fa, double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * eps) return left + right + diff / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

}  // namespace

double student_t_two_sided(double t, double df) {
  if (!(df > 0.0)) throw ConfigError("student_t_two_sided: df must be positive");
  if (std::isnan(t)) throw NumericError("student_t_two_sided: t is NaN");
  // With x = sqrt(df) tan(theta) the density becomes c cos^(df-1)(theta)
  // on [0, pi/2), so the tail is a finite integral of a smooth function.
  const double lo = std::atan(std::abs(t) / std::sqrt(df));
  const double hi = std::numbers::pi / 2.0;
  if (lo >= hi) return 0.0;
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(std::numbers::pi);
  auto f = [df](double th) {
    const double co = std::cos(th);
    return co <= 0.0 ? (df > 1.0 ? 0.0 : (df == 1.0 ? 1.0 : HUGE_VAL)) : std::pow(co, df - 1.0);
  };
  const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
  const double whole = simpson(lo, hi, fa, fm, fb);
  const double tail = adaptive_simpson(f, lo, hi, fa, fm, fb, whole, 1e-13, 50);
  return std::clamp(2.0 * c * tail, 0.0, 1.0);
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw DataError("welch_t: each sample needs at least two values");
  auto moments = [](const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / static_cast<double>(x.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  WelchResult r;
  if (sa + sb == 0.0) {
    // Both samples constant.
    r.df = na + nb - 2.0;
    if (ma == mb) return r;
    r.t = ma > mb ? HUGE_VAL : -HUGE_VAL;
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided(r.t, r.df);
  return r;
}

}  // namespace tweetnews::eval
