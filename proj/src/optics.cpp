#include "logcleaner/optics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "logcleaner/types.hpp"

namespace logcleaner {

DistanceMatrix cosine_distances(std::span<const std::vector<double>> rows) {
    const std::size_t n = rows.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : rows[i]) s += v * v;
        norms[i] = std::sqrt(s);
    }
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sim = 0.0;
            if (norms[i] > 0.0 && norms[j] > 0.0) {
                for (std::size_t k = 0; k < rows[i].size(); ++k) sim += rows[i][k] * rows[j][k];
                sim /= norms[i] * norms[j];
            }
            d.set(i, j, std::clamp(1.0 - sim, 0.0, 2.0));
        }
    }
    return d;
}

OpticsResult optics(const DistanceMatrix& distances, std::size_t min_samples) {
    if (min_samples == 0) throw UsageError("min_samples must be positive");
    const std::size_t n = distances.size();
    OpticsResult r;
    r.reachability.assign(n, kUndefined);
    r.core_distance.assign(n, kUndefined);
    r.predecessor.assign(n, kNoPredecessor);
    if (n >= min_samples) {
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = distances(i, j);
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_samples - 1), row.end());
            r.core_distance[i] = row[min_samples - 1];
        }
    }
    std::vector<bool> processed(n, false);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t point = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (processed[i]) continue;
            if (point == n || r.reachability[i] < r.reachability[point]) point = i;
        }
        processed[point] = true;
        r.ordering.push_back(point);
        if (r.core_distance[point] == kUndefined) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (processed[j]) continue;
            double reach = std::max(distances(point, j), r.core_distance[point]);
            if (reach < r.reachability[j]) {
                r.reachability[j] = reach;
                r.predecessor[j] = static_cast<std::int64_t>(point);
            }
        }
    }
    return r;
}

namespace {

struct SteepDownArea {
    std::size_t start;
    std::size_t end;
    double mib;
};

std::size_t extend_region(const std::vector<bool>& steep, const std::vector<bool>& xward, std::size_t start,
                          std::size_t min_samples) {
    std::size_t non_xward = 0;
    std::size_t end = start;
    for (std::size_t i = start; i < steep.size(); ++i) {
        if (steep[i]) {
            non_xward = 0;
            end = i;
        } else if (!xward[i]) {
            if (++non_xward > min_samples) break;
        } else {
            break;
        }
    }
    return end;
}

void update_filter(std::vector<SteepDownArea>& areas, double mib, double xi_complement,
                   const std::vector<double>& plot) {
    if (std::isinf(mib)) {
        areas.clear();
        return;
    }
    std::erase_if(areas, [&](const SteepDownArea& a) { return !(mib <= plot[a.start] * xi_complement); });
    for (auto& a : areas) a.mib = std::max(a.mib, mib);
}

std::optional<OrderedCluster> correct_predecessor(const std::vector<double>& plot,
                                                  const std::vector<std::int64_t>& predecessor_plot,
                                                  const std::vector<std::size_t>& ordering, std::size_t s,
                                                  std::size_t e) {
    while (s < e) {
        if (plot[s] > plot[e]) return OrderedCluster{s, e};
        const auto p = predecessor_plot[e];
        for (std::size_t i = s; i < e; ++i)
            if (p == static_cast<std::int64_t>(ordering[i])) return OrderedCluster{s, e};
        --e;
    }
    return std::nullopt;
}

}  // namespace

std::vector<OrderedCluster> xi_clusters(const OpticsResult& result, std::size_t min_samples, double xi,
                                        std::size_t min_cluster_size) {
    if (!(xi > 0.0 && xi < 1.0)) throw UsageError("xi must be in (0, 1)");
    const std::size_t n = result.ordering.size();
    std::vector<double> plot(n + 1, kUndefined);
    std::vector<std::int64_t> predecessor_plot(n);
    for (std::size_t i = 0; i < n; ++i) {
        plot[i] = result.reachability[result.ordering[i]];
        predecessor_plot[i] = result.predecessor[result.ordering[i]];
    }
    const double xi_complement = 1.0 - xi;
    std::vector<bool> steep_up(n), steep_down(n), up(n), down(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ratio = plot[i] / plot[i + 1];  // NaN for inf/inf and 0/0 compares false everywhere
        steep_up[i] = ratio <= xi_complement;
        steep_down[i] = ratio >= 1.0 / xi_complement;
        down[i] = ratio > 1.0;
        up[i] = ratio < 1.0;
    }

    std::vector<SteepDownArea> areas;
    std::vector<OrderedCluster> clusters;
    std::size_t index = 0;
    double mib = 0.0;
    for (std::size_t steep = 0; steep < n; ++steep) {
        if (!(steep_up[steep] || steep_down[steep]) || steep < index) continue;
        for (std::size_t i = index; i <= steep; ++i) mib = std::max(mib, plot[i]);
        update_filter(areas, mib, xi_complement, plot);
        if (steep_down[steep]) {
            const std::size_t end = extend_region(steep_down, up, steep, min_samples);
            areas.push_back({steep, end, 0.0});
            index = end + 1;
            mib = plot[index];
            continue;
        }
        const std::size_t u_start = steep;
        const std::size_t u_end = extend_region(steep_up, down, u_start, min_samples);
        index = u_end + 1;
        mib = plot[index];

        std::vector<OrderedCluster> found;
        for (const auto& d : areas) {
            std::size_t c_start = d.start;
            std::size_t c_end = u_end;
            if (plot[c_end + 1] * xi_complement < d.mib) continue;
            const double d_max = plot[d.start];
            if (d_max * xi_complement >= plot[c_end + 1]) {
                while (plot[c_start + 1] > plot[c_end + 1] && c_start < d.end) ++c_start;
            } else if (plot[c_end + 1] * xi_complement >= d_max) {
                while (c_end > u_start && plot[c_end - 1] > d_max) --c_end;
            }
            auto corrected = correct_predecessor(plot, predecessor_plot, result.ordering, c_start, c_end);
            if (!corrected) continue;
            c_start = corrected->start;
            c_end = corrected->end;
            if (c_end - c_start + 1 < min_cluster_size) continue;
            if (c_start > d.end) continue;
            if (c_end < u_start) continue;
            found.push_back({c_start, c_end});
        }
        clusters.insert(clusters.end(), found.rbegin(), found.rend());
    }
    return clusters;
}

std::vector<int> xi_labels(const OpticsResult& result, std::span<const OrderedCluster> clusters) {
    const std::size_t n = result.ordering.size();
    std::vector<int> by_position(n, -1);
    int label = 0;
    for (const auto& c : clusters) {
        bool free = std::all_of(by_position.begin() + static_cast<std::ptrdiff_t>(c.start),
                                by_position.begin() + static_cast<std::ptrdiff_t>(c.end + 1),
                                [](int l) { return l == -1; });
        if (!free) continue;
        std::fill(by_position.begin() + static_cast<std::ptrdiff_t>(c.start),
                  by_position.begin() + static_cast<std::ptrdiff_t>(c.end + 1), label++);
    }
    std::vector<int> labels(n, -1);
    for (std::size_t i = 0; i < n; ++i) labels[result.ordering[i]] = by_position[i];
    return labels;
}

}  // namespace logcleaner
