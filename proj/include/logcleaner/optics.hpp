#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace logcleaner {

/// Dense symmetric distance matrix.
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n = 0) : n_(n), d_(n * n, 0.0) {}
    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) { d_[i * n_ + j] = d_[j * n_ + i] = v; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// 1 - cosine similarity, clipped to [0, 2]; zero vectors sit at distance 1 from everything
/// else and the diagonal is exactly 0.
DistanceMatrix cosine_distances(std::span<const std::vector<double>> rows);

inline constexpr double kUndefined = std::numeric_limits<double>::infinity();
inline constexpr std::int64_t kNoPredecessor = -1;

struct OpticsResult {
    std::vector<std::size_t> ordering;
    std::vector<double> reachability;    // per point, kUndefined for the first point of each component
    std::vector<double> core_distance;   // distance to the min_samples-th neighbour, self included
    std::vector<std::int64_t> predecessor;
};

/// Unbounded-radius OPTICS. Among equally reachable unprocessed points the lowest index goes next.
OpticsResult optics(const DistanceMatrix& distances, std::size_t min_samples);

/// Cluster as [start, end] positions in the ordering.
struct OrderedCluster {
    std::size_t start = 0;
    std::size_t end = 0;
    bool operator==(const OrderedCluster&) const = default;
};

/// Steep-area cluster extraction with predecessor correction, smaller clusters first.
std::vector<OrderedCluster> xi_clusters(const OpticsResult& result, std::size_t min_samples, double xi,
                                        std::size_t min_cluster_size);

/// Per-point cluster labels, -1 for noise. A cluster overlapping an already labelled one is skipped.
std::vector<int> xi_labels(const OpticsResult& result, std::span<const OrderedCluster> clusters);

}  // namespace logcleaner
