#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/detectors.hpp"
#include "logcleaner/grouper.hpp"

namespace logcleaner {

/// Which candidate the retry loop tries first.
enum class CandidateOrder { frequency_desc, frequency_asc, ordinal };

std::string_view to_string(CandidateOrder order);
CandidateOrder parse_candidate_order(std::string_view text);

struct RetryOptions {
    double alpha = 0.02;
    CandidateOrder order = CandidateOrder::frequency_desc;
    /// Keep sweeping the reinstated candidates until a pass removes nothing.
    bool multi_pass = false;
    std::uint64_t seed = 0;
};

enum class StepAction { removed, reinstated };

/// Precision, recall and F1 without counts or timing.
struct Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static Score of(const EvalMetrics& m) { return {m.precision, m.recall, m.f1}; }
    bool operator==(const Score&) const = default;
};

struct TraceStep {
    std::string event_id;
    StepAction action = StepAction::removed;
    Score score;          // after removing the event
    double f1_max = 0.0;  // the running best the trial was compared against
    double delta_f1() const { return score.f1 - f1_max; }
    bool operator==(const TraceStep&) const = default;
};

struct SingleEventScore {
    std::string event_id;
    Score score;
    bool relevant = false;
    bool operator==(const SingleEventScore&) const = default;
};

struct ReductionTrace {
    double alpha = 0.0;
    std::string method = "retry";
    std::string model;
    std::uint64_t seed = 0;
    Score unreduced;  // all events of the input view
    Score baseline;   // start of the retry loop; equals unreduced unless events were pruned first
    std::vector<TraceStep> steps;
    std::vector<double> f1_max_history;  // baseline, then one entry per accepted removal
    std::vector<std::string> surviving_events;
    std::vector<std::string> pruned_events;  // cluster method: irrelevant events removed as a batch
    std::vector<SingleEventScore> single_event_scores;
    Score final_score;
    std::uint64_t events_total = 0;
    std::uint64_t lines_total = 0;
    std::uint64_t lines_removed = 0;

    std::uint64_t events_removed() const { return events_total - surviving_events.size(); }
    double events_reduction() const;
    double lines_reduction() const;
    double pruned_delta_f1() const { return baseline.f1 - unreduced.f1; }

    /// Final F1 keeps within alpha of the baseline, or the running best never fell below it.
    bool sound() const;

    bool operator==(const ReductionTrace&) const = default;
};

/// Greedy one-at-a-time removal. A candidate stays removed when the retrained F1 is at least
/// (1 - alpha) * f1_max, which then becomes that F1. A trial that fails to train scores 0.
/// Throws DataError when the baseline cannot be trained.
ReductionTrace retry_reduce(const LabeledDataset& dataset, const ModelSpec& model, const RetryOptions& options);

/// Scores every event alone.
std::vector<SingleEventScore> single_event_scores(const LabeledDataset& dataset, const ModelSpec& model,
                                                  std::uint64_t seed);

struct ClusterOptions {
    RetryOptions retry;
    std::size_t restarts = 50;
    std::size_t max_iterations = 100;
};

struct ClusterReduction {
    ReductionTrace trace;
    std::vector<std::string> relevant;
    std::vector<std::string> warnings;
};

/// Splits events into relevant and irrelevant by 2-means over single-event (P, R, F1), drops the
/// irrelevant ones and runs the retry loop over what remains.
ClusterReduction cluster_reduce(const LabeledDataset& dataset, const ModelSpec& model, const ClusterOptions& options);

/// The relevant cluster is the one whose centroid has the higher F1, then precision, then recall.
/// Returns nullopt when every score is identical.
std::optional<std::vector<bool>> relevant_by_kmeans(std::span<const SingleEventScore> scores,
                                                    std::size_t restarts, std::size_t max_iterations,
                                                    std::uint64_t seed);

enum class Category { key, anti, duplicative };

std::string_view to_string(Category c);
Category parse_category(std::string_view text);

struct EventCategory {
    std::string event_id;
    Category category = Category::key;
    double delta_f1 = 0.0;  // 0 for kept events
    std::string evidence;
    bool operator==(const EventCategory&) const = default;
};

inline constexpr double kDefaultEpsilon = 0.005;

/// Removed with F1 gain above epsilon: anti. Any other removal: duplicative. Kept: key.
/// Events come out in the order surviving, removed steps, pruned.
std::vector<EventCategory> categorize_events(const ReductionTrace& trace, double epsilon = kDefaultEpsilon);

void write_trace(std::ostream& out, const ReductionTrace& trace);
ReductionTrace read_trace(std::istream& in);
void save_trace(const std::filesystem::path& path, const ReductionTrace& trace);
ReductionTrace load_trace(const std::filesystem::path& path);

void write_categories(std::ostream& out, std::span<const EventCategory> categories);
std::vector<EventCategory> read_categories(std::istream& in);

/// Human-readable table of the trace and categories.
void write_study_summary(std::ostream& out, const ReductionTrace& trace, std::span<const EventCategory> categories);

}  // namespace logcleaner
