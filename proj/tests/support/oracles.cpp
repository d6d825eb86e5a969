#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace logcleaner::testing {

std::vector<SubsetScore> enumerate_subsets(const LabeledDataset& dataset, const ModelSpec& model, std::uint64_t seed) {
    const auto events = dataset.active_events();
    if (events.size() > 10) throw std::invalid_argument("exhaustive search is capped at 10 events");
    std::vector<SubsetScore> out;
    for (std::uint32_t mask = 0; mask < (1u << events.size()); ++mask) {
        SubsetScore s;
        for (std::size_t i = 0; i < events.size(); ++i)
            if (mask & (1u << i)) s.events.push_back(events[i]);
        try {
            s.f1 = train_and_evaluate(dataset.keep_only(s.events), model, seed).f1;
        } catch (const Error&) {
            s.f1 = 0.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

double best_subset_f1(const LabeledDataset& dataset, const ModelSpec& model, std::uint64_t seed) {
    double best = 0.0;
    for (const auto& s : enumerate_subsets(dataset, model, seed)) best = std::max(best, s.f1);
    return best;
}

double brute_force_mi(const std::array<std::array<std::uint64_t, 2>, 2>& cells) {
    double n = 0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) n += static_cast<double>(cells[x][y]);
    if (n == 0) return 0.0;
    double mi = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double pxy = static_cast<double>(cells[x][y]) / n;
            if (pxy == 0) continue;
            const double px = static_cast<double>(cells[x][0] + cells[x][1]) / n;
            const double py = static_cast<double>(cells[0][y] + cells[1][y]) / n;
            mi += pxy * std::log(pxy / (px * py));
        }
    return mi;
}

}  // namespace logcleaner::testing
