#include "tweetnews/datakit/kmeans.hpp"

#include <limits>

#include "tweetnews/error.hpp"
#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::datakit {

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

std::size_t nearest(const Point& p, const std::vector<Point>& centroids, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

}  // namespace

KmeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  if (k == 0 || k > points.size()) {
    throw ConfigError("kmeans: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(points.size()) + "]");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw ShapeError("kmeans: points differ in dimension");
  }
  Rng rng(seed);
  KmeansResult r;
  // k-means++: first centre uniform, then proportional to squared distance.
  std::vector<bool> chosen(points.size(), false);
  std::size_t first = rng.below(points.size());
  r.centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], points[first]);
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = points.size();
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    } else {
      // Only duplicates of existing centres remain.
      for (std::size_t i = 0; i < points.size() && pick == points.size(); ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    r.centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
  }

  r.assignment.assign(points.size(), k);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = 0.0;
      const auto c = nearest(points[i], r.centroids, &d);
      inertia += d;
      if (c != r.assignment[i]) {
        r.assignment[i] = c;
        changed = true;
      }
    }
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = iter + 1;
    if (!changed) {
      r.converged = true;
      break;
    }
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto& s = sums[r.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) s[j] += points[i][j];
      ++counts[r.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) r.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return r;
}

std::vector<std::optional<std::size_t>> select_representatives(const KmeansResult& result,
                                                               const std::vector<Point>& points) {
  std::vector<std::optional<std::size_t>> reps(result.centroids.size());
  std::vector<double> best(result.centroids.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = result.assignment.at(i);
    const double d = squared_distance(points[i], result.centroids[c]);
    if (d < best[c]) {
      best[c] = d;
      reps[c] = i;
    }
  }
  return reps;
}

std::vector<std::string> representative_texts(const KmeansResult& result, const std::vector<Point>& points,
                                              const std::vector<std::string>& texts) {
  if (texts.size() != points.size()) throw ShapeError("representative_texts: texts and points differ in count");
  std::vector<std::string> out;
  for (const auto& r : select_representatives(result, points)) {
    if (r) out.push_back(texts[*r]);
  }
  return out;
}

}  // namespace tweetnews::datakit
