#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tweetnews::datakit {

using Point = std::vector<double>;

struct KmeansResult {
  std::vector<Point> centroids;
  std::vector<std::size_t> assignment;
  double inertia = 0.0;                 // sum of squared distances to assigned centroids
  std::vector<double> inertia_history;  // after each assignment pass
  std::size_t iterations = 0;
  bool converged = false;
};

/// k-means++ seeding then Lloyd iterations until assignments stop changing
/// or max_iter passes. Distance ties go to the lowest centroid index; an
/// empty cluster keeps its previous centroid. Throws ConfigError when k is
/// 0 or exceeds the number of points, ShapeError on ragged points.
KmeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

double squared_distance(const Point& a, const Point& b);

/// Per cluster, the index of the point nearest its centroid (ties to the
/// lowest index); nullopt for a cluster with no members.
std::vector<std::optional<std::size_t>> select_representatives(const KmeansResult& result,
                                                               const std::vector<Point>& points);

/// Texts of the representatives, skipping empty clusters.
std::vector<std::string> representative_texts(const KmeansResult& result, const std::vector<Point>& points,
                                              const std::vector<std::string>& texts);

}  // namespace tweetnews::datakit
