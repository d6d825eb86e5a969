#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/ingest.hpp"
#include "logcleaner/template_miner.hpp"
#include "logcleaner/types.hpp"

namespace logcleaner {

struct EventGroup {
    std::string group_id;
    std::vector<EventIndex> events;
    Label label = Label::normal;
    std::vector<std::uint64_t> line_indices;

    bool operator==(const EventGroup&) const = default;
};

struct AnomalyRatio {
    std::size_t groups = 0;
    std::size_t anomalous = 0;
    double ratio() const { return groups == 0 ? 0.0 : static_cast<double>(anomalous) / static_cast<double>(groups); }
};

/// Groups of one template set plus a chronological train/test split point.
///
/// A dataset is an immutable view. remove_event and keep_only share the underlying groups and
/// only carry a per-event activity mask, so retry loops never copy group contents. Groups keep
/// their labels even when every event has been removed from them.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<EventGroup> groups, std::shared_ptr<const TemplateSet> templates,
                   std::size_t split_point);

    std::size_t group_count() const { return base_ ? base_->groups.size() : 0; }
    std::size_t event_count() const { return active_.size(); }
    const TemplateSet& templates() const { return *base_->templates; }
    std::shared_ptr<const TemplateSet> template_set() const { return base_->templates; }
    const std::string& event_id(EventIndex e) const { return templates()[e].event_id; }

    std::size_t split_point() const { return split_; }
    LabeledDataset with_split(std::size_t split_point) const;

    Label label(std::size_t g) const { return base_->groups[g].label; }
    const std::string& group_id(std::size_t g) const { return base_->groups[g].group_id; }
    std::vector<Label> labels() const;

    bool is_active(EventIndex e) const { return e < active_.size() && active_[e]; }
    std::vector<EventIndex> active_events() const;
    std::size_t active_count() const;

    /// Group g with inactive events (and their line indices) filtered out.
    EventGroup group(std::size_t g) const;

    template <class F>
    void for_each_event(std::size_t g, F&& f) const {
        for (EventIndex e : base_->groups[g].events)
            if (active_[e]) f(e);
    }

    /// Occurrences of e across all groups of the underlying data (lines attributable to e).
    std::uint64_t occurrences(EventIndex e) const { return base_->occurrences[e]; }
    /// Number of groups whose underlying events contain e.
    std::uint64_t containing_groups(EventIndex e) const { return base_->containing[e]; }

    LabeledDataset remove_event(EventIndex e) const;
    LabeledDataset remove_event(std::string_view event_id) const;
    LabeledDataset remove_events(std::span<const EventIndex> events) const;
    LabeledDataset keep_only(std::span<const EventIndex> events) const;

    AnomalyRatio train_ratio() const;
    AnomalyRatio test_ratio() const;

    /// True when both views expose the same groups, labels, active events and split.
    bool same_view(const LabeledDataset& other) const;

private:
    struct Base {
        std::vector<EventGroup> groups;
        std::shared_ptr<const TemplateSet> templates;
        std::vector<std::uint64_t> occurrences;
        std::vector<std::uint64_t> containing;
    };

    AnomalyRatio ratio(std::size_t begin, std::size_t end) const;

    std::shared_ptr<const Base> base_;
    std::vector<bool> active_;
    std::size_t split_ = 0;
};

/// Chronological split: the first floor(ratio * n) groups train, clamped so both sides are
/// non-empty whenever n >= 2.
std::size_t chronological_split(std::size_t group_count, double train_ratio = 0.8);

struct GroupingStats {
    std::uint64_t dropped_records = 0;   // no session key or no event
    std::uint64_t unlabeled_sessions = 0;
};

inline constexpr std::string_view kHdfsBlockPattern = R"(blk_-?\d+)";

/// One group per distinct session key, in first-seen order. A record naming several keys joins
/// each of their groups. Sessions absent from the label table are labelled normal and counted.
LabeledDataset group_by_session(std::span<const LogRecord> records, std::span<const EventIndex> events,
                                std::shared_ptr<const TemplateSet> templates, std::string_view key_pattern,
                                const LabelSource& labels, double train_ratio = 0.8,
                                GroupingStats* stats = nullptr);

/// Consecutive non-overlapping windows of window_size events; the last partial window is kept.
/// A window is anomalous iff any member line is anomalous.
LabeledDataset group_fixed(std::span<const LogRecord> records, std::span<const EventIndex> events,
                           std::shared_ptr<const TemplateSet> templates, std::size_t window_size,
                           const LabelSource& labels, double train_ratio = 0.8,
                           GroupingStats* stats = nullptr);

/// `#logcleaner-groups v1` file: `group_id<TAB>label<TAB>space-separated event ids` per group.
void write_groups(std::ostream& out, const LabeledDataset& dataset);
LabeledDataset read_groups(std::istream& in, std::shared_ptr<const TemplateSet> templates);
void save_groups(const std::filesystem::path& path, const LabeledDataset& dataset);
LabeledDataset load_groups(const std::filesystem::path& path, std::shared_ptr<const TemplateSet> templates);

}  // namespace logcleaner
