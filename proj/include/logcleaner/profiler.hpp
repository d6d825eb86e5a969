#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/grouper.hpp"
#include "logcleaner/optics.hpp"

namespace logcleaner {

/// Event presence against label over a set of groups: cells[present][anomalous].
struct Contingency {
    std::array<std::array<std::uint64_t, 2>, 2> cells{};

    std::uint64_t total() const { return cells[0][0] + cells[0][1] + cells[1][0] + cells[1][1]; }
    bool operator==(const Contingency&) const = default;
};

/// Plug-in mutual information in nats; empty cells contribute 0. With miller_madow the
/// first-order bias correction is added, which can make the estimate negative.
double mutual_information(const Contingency& table, bool miller_madow = false);

struct MIScore {
    EventIndex event = kNoEvent;
    std::string event_id;
    double mi = 0.0;
    Contingency counts;
};

Contingency contingency(const LabeledDataset& dataset, EventIndex event);
MIScore mutual_information(const LabeledDataset& dataset, EventIndex event, bool miller_madow = false);

struct TfidfStage {
    std::vector<EventIndex> kept;
    std::vector<EventIndex> sporadic;
    std::vector<double> document_frequency;  // by event index
    std::vector<double> weight;              // term frequency times smoothed idf, by event index
};

/// Events present in fewer than cutoff of the groups are sporadic unless whitelisted.
TfidfStage tfidf_filter(const LabeledDataset& dataset, std::span<const EventIndex> candidates, double cutoff,
                        std::span<const EventIndex> whitelist = {});

struct AntiStage {
    std::vector<EventIndex> relevant;
    std::vector<EventIndex> anti;
    std::vector<MIScore> scores;  // aligned with the candidates
};

/// MI at or below theta_anti (plus 1e-12) marks an anti-event.
AntiStage anti_event_filter(const LabeledDataset& dataset, std::span<const EventIndex> candidates,
                            double theta_anti, bool miller_madow = false);

/// Presence-based co-occurrence counts between events; the diagonal holds containment counts.
class AppearGraph {
public:
    AppearGraph() = default;
    explicit AppearGraph(std::vector<EventIndex> nodes);

    static AppearGraph build(const LabeledDataset& dataset, std::span<const EventIndex> events);
    static AppearGraph build(const LabeledDataset& dataset, std::span<const EventIndex> events, std::size_t begin,
                             std::size_t end);

    const std::vector<EventIndex>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    std::uint64_t weight(std::size_t i, std::size_t j) const { return weights_[i * size() + j]; }

    /// Adds another partial graph over the same nodes.
    void merge(const AppearGraph& other);

    /// Each row divided by its own diagonal; all-zero rows stay zero.
    std::vector<std::vector<double>> normalized_rows() const;

    bool operator==(const AppearGraph&) const = default;

private:
    std::vector<EventIndex> nodes_;
    std::vector<std::uint64_t> weights_;
};

struct DuplicativeStage {
    std::vector<EventIndex> retained;
    std::vector<std::pair<EventIndex, EventIndex>> removed;  // (event, representative)
    std::vector<EventIndex> outliers;
    std::vector<int> labels;  // per graph node, -1 for noise
    OpticsResult optics;
};

inline constexpr double kDefaultXi = 0.05;

/// Clusters the normalized graph rows with OPTICS (cosine distance) and keeps the highest-MI event
/// of each cluster, lower ordinal on ties. Noise points are kept as outliers. mi must align
/// with the graph nodes.
DuplicativeStage duplicative_separator(const AppearGraph& graph, std::span<const MIScore> mi,
                                       std::size_t theta_dup, double xi = kDefaultXi);

struct ProfileConfig {
    double cutoff = 0.1;
    double theta_anti = 0.0;
    std::size_t theta_dup = 2;
    double xi = kDefaultXi;
    bool tfidf = true;
    bool anti = true;
    bool duplicative = true;
    bool miller_madow = false;
    std::vector<std::string> whitelist;

    void validate() const;
    bool operator==(const ProfileConfig&) const = default;
};

enum class RemovalReason { sporadic, anti, duplicative };

std::string_view to_string(RemovalReason reason);

struct EventDisposition {
    std::string event_id;
    std::string template_text;
    std::optional<RemovalReason> removed;
    std::string representative;  // duplicative removals only

    bool retained() const { return !removed; }
    bool operator==(const EventDisposition&) const = default;
};

/// The profiler's output: one disposition per template, in template order.
class ReducedEventSet {
public:
    ReducedEventSet() = default;
    ReducedEventSet(std::vector<EventDisposition> events, std::vector<std::string> outliers, ProfileConfig config);

    const std::vector<EventDisposition>& events() const { return events_; }
    const std::vector<std::string>& outliers() const { return outliers_; }
    const ProfileConfig& config() const { return config_; }

    const EventDisposition* find(std::string_view event_id) const;
    std::vector<std::string> retained() const;
    std::size_t removed_count(std::optional<RemovalReason> reason = std::nullopt) const;

    /// FNV-1a of the canonical serialization without the trailer.
    std::string content_hash() const;

    /// Serialization ends with `#hash <hex>`; read refuses files whose trailer does not match.
    void write(std::ostream& out) const;
    static ReducedEventSet read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static ReducedEventSet load(const std::filesystem::path& path);

    bool operator==(const ReducedEventSet&) const = default;

private:
    void write_body(std::ostream& out) const;
    void check() const;

    std::vector<EventDisposition> events_;
    std::vector<std::string> outliers_;
    ProfileConfig config_;
};

struct ProfileResult {
    ReducedEventSet reduced;
    TfidfStage tfidf;
    AntiStage anti;
    DuplicativeStage duplicative;
    std::array<std::size_t, 4> retained_after{};  // all, +tfidf, +anti, +dup
    std::uint64_t lines_total = 0;
    std::uint64_t lines_removed = 0;

    double events_reduction(std::size_t stage) const;
    double lines_reduction() const;
};

/// TF-IDF filter, anti-event filter and duplicative separator over every template of the dataset.
ProfileResult profile(const LabeledDataset& dataset, const ProfileConfig& config);

/// The training groups only, as a dataset of their own.
LabeledDataset training_view(const LabeledDataset& dataset);

}  // namespace logcleaner
