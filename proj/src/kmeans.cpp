#include "logcleaner/kmeans.hpp"

#include <limits>

#include "logcleaner/random.hpp"
#include "logcleaner/types.hpp"

namespace logcleaner {

namespace {

double squared_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<Point> seed_centroids(std::span<const Point> points, std::size_t k, Rng& rng) {
    std::vector<Point> centroids;
    centroids.push_back(points[rng.index(points.size())]);
    std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points[i], centroids.back()));
            total += nearest[i];
        }
        if (total <= 0.0) {
            centroids.push_back(points[rng.index(points.size())]);
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t pick = points.size() - 1;
        for (std::size_t i = 0; i < points.size(); ++i) {
            target -= nearest[i];
            if (target < 0.0 && nearest[i] > 0.0) {
                pick = i;
                break;
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

KMeansResult lloyd(std::span<const Point> points, std::vector<Point> centroids, std::size_t max_iterations) {
    const std::size_t k = centroids.size();
    const std::size_t dim = points.front().size();
    KMeansResult result;
    result.assignment.assign(points.size(), 0);
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::size_t best = 0;
            double best_d = squared_distance(points[i], centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = squared_distance(points[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (result.assignment[i] != best) changed = true;
            result.assignment[i] = best;
        }
        if (!changed) break;
        std::vector<Point> sums(k, Point(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto c = result.assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its previous centroid
            for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
        }
    }
    result.inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        result.inertia += squared_distance(points[i], centroids[result.assignment[i]]);
    result.centroids = std::move(centroids);
    return result;
}

}  // namespace

KMeansResult kmeans(std::span<const Point> points, const KMeansOptions& options) {
    if (options.k == 0 || points.size() < options.k)
        throw UsageError("kmeans needs at least k=" + std::to_string(options.k) + " points");
    for (const auto& p : points)
        if (p.size() != points.front().size()) throw UsageError("kmeans points differ in dimension");
    Rng rng(options.seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
        auto result = lloyd(points, seed_centroids(points, options.k, rng), options.max_iterations);
        if (result.inertia < best.inertia) best = std::move(result);
    }
    return best;
}

}  // namespace logcleaner
