#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace logcleaner {

using Point = std::vector<double>;

struct KMeansOptions {
    std::size_t k = 2;
    std::size_t restarts = 50;
    std::size_t max_iterations = 100;
    std::uint64_t seed = 0;
};

struct KMeansResult {
    std::vector<std::size_t> assignment;
    std::vector<Point> centroids;
    double inertia = 0.0;
};

/// Lloyd iterations from k-means++ seeds; the restart with the lowest inertia wins (earliest on ties).
/// Throws UsageError when there are fewer points than clusters.
KMeansResult kmeans(std::span<const Point> points, const KMeansOptions& options);

}  // namespace logcleaner
