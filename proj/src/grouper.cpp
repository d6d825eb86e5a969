#include "logcleaner/grouper.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <regex>
#include <unordered_map>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

LabeledDataset::LabeledDataset(std::vector<EventGroup> groups, std::shared_ptr<const TemplateSet> templates,
                               std::size_t split_point) {
    if (!templates) throw Error("dataset requires a template set");
    auto base = std::make_shared<Base>();
    const std::size_t n_events = templates->size();
    base->occurrences.assign(n_events, 0);
    base->containing.assign(n_events, 0);
    std::vector<std::size_t> last_seen(n_events, static_cast<std::size_t>(-1));
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& group = groups[g];
        if (!group.line_indices.empty() && group.line_indices.size() != group.events.size())
            throw DataError("group " + group.group_id + " has mismatched events and line indices");
        for (EventIndex e : group.events) {
            if (e >= n_events) throw DataError("group " + group.group_id + " references an unknown event");
            ++base->occurrences[e];
            if (last_seen[e] != g) {
                last_seen[e] = g;
                ++base->containing[e];
            }
        }
    }
    if (split_point > groups.size()) throw DataError("split point beyond the number of groups");
    base->groups = std::move(groups);
    base->templates = std::move(templates);
    base_ = std::move(base);
    active_.assign(n_events, true);
    split_ = split_point;
}

LabeledDataset LabeledDataset::with_split(std::size_t split_point) const {
    if (split_point > group_count()) throw DataError("split point beyond the number of groups");
    LabeledDataset copy = *this;
    copy.split_ = split_point;
    return copy;
}

std::vector<Label> LabeledDataset::labels() const {
    std::vector<Label> out;
    out.reserve(group_count());
    for (const auto& g : base_->groups) out.push_back(g.label);
    return out;
}

std::vector<EventIndex> LabeledDataset::active_events() const {
    std::vector<EventIndex> out;
    for (EventIndex e = 0; e < active_.size(); ++e)
        if (active_[e]) out.push_back(e);
    return out;
}

std::size_t LabeledDataset::active_count() const {
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
}

EventGroup LabeledDataset::group(std::size_t g) const {
    const auto& source = base_->groups.at(g);
    EventGroup out;
    out.group_id = source.group_id;
    out.label = source.label;
    const bool with_lines = !source.line_indices.empty();
    for (std::size_t i = 0; i < source.events.size(); ++i) {
        if (!active_[source.events[i]]) continue;
        out.events.push_back(source.events[i]);
        if (with_lines) out.line_indices.push_back(source.line_indices[i]);
    }
    return out;
}

LabeledDataset LabeledDataset::remove_event(EventIndex e) const {
    if (e >= active_.size()) throw DataError("cannot remove unknown event ordinal " + std::to_string(e));
    LabeledDataset copy = *this;
    copy.active_[e] = false;
    return copy;
}

LabeledDataset LabeledDataset::remove_event(std::string_view event_id) const {
    return remove_event(templates().require(event_id));
}

LabeledDataset LabeledDataset::remove_events(std::span<const EventIndex> events) const {
    LabeledDataset copy = *this;
    for (EventIndex e : events) {
        if (e >= active_.size()) throw DataError("cannot remove unknown event ordinal " + std::to_string(e));
        copy.active_[e] = false;
    }
    return copy;
}

LabeledDataset LabeledDataset::keep_only(std::span<const EventIndex> events) const {
    LabeledDataset copy = *this;
    std::fill(copy.active_.begin(), copy.active_.end(), false);
    for (EventIndex e : events) {
        if (e >= active_.size()) throw DataError("cannot keep unknown event ordinal " + std::to_string(e));
        copy.active_[e] = active_[e];
    }
    return copy;
}

AnomalyRatio LabeledDataset::ratio(std::size_t begin, std::size_t end) const {
    AnomalyRatio r;
    for (std::size_t g = begin; g < end; ++g) {
        ++r.groups;
        if (base_->groups[g].label == Label::anomalous) ++r.anomalous;
    }
    return r;
}

AnomalyRatio LabeledDataset::train_ratio() const { return ratio(0, split_); }
AnomalyRatio LabeledDataset::test_ratio() const { return ratio(split_, group_count()); }

bool LabeledDataset::same_view(const LabeledDataset& other) const {
    if (group_count() != other.group_count() || active_ != other.active_ || split_ != other.split_) return false;
    for (std::size_t g = 0; g < group_count(); ++g)
        if (group(g) != other.group(g)) return false;
    return true;
}

std::size_t chronological_split(std::size_t group_count, double train_ratio) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw UsageError("split ratio must be in (0,1)");
    if (group_count < 2) return group_count;
    auto split = static_cast<std::size_t>(static_cast<double>(group_count) * train_ratio);
    return std::clamp<std::size_t>(split, 1, group_count - 1);
}

LabeledDataset group_by_session(std::span<const LogRecord> records, std::span<const EventIndex> events,
                                std::shared_ptr<const TemplateSet> templates, std::string_view key_pattern,
                                const LabelSource& labels, double train_ratio, GroupingStats* stats) {
    if (records.size() != events.size()) throw Error("records and events differ in length");
    if (labels.kind != LabelKind::per_session_table) throw UsageError("session grouping needs a session label table");
    std::regex pattern;
    try {
        pattern = std::regex(std::string(key_pattern), std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw UsageError("bad session key pattern '" + std::string(key_pattern) + "': " + e.what());
    }
    GroupingStats local;
    std::vector<EventGroup> groups;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& record = records[i];
        if (events[i] == kNoEvent) {
            ++local.dropped_records;
            continue;
        }
        keys.clear();
        for (auto it = std::sregex_iterator(record.content.begin(), record.content.end(), pattern);
             it != std::sregex_iterator(); ++it) {
            auto key = it->str();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(std::move(key));
        }
        if (keys.empty()) {
            ++local.dropped_records;
            continue;
        }
        for (auto& key : keys) {
            auto [it, inserted] = index.emplace(key, groups.size());
            if (inserted) {
                EventGroup group;
                group.group_id = key;
                if (auto label = labels.session_label(key)) {
                    group.label = *label;
                } else {
                    ++local.unlabeled_sessions;
                }
                groups.push_back(std::move(group));
            }
            auto& group = groups[it->second];
            group.events.push_back(events[i]);
            group.line_indices.push_back(record.line_index);
        }
    }
    if (stats) *stats = local;
    auto split = chronological_split(groups.size(), train_ratio);
    return LabeledDataset(std::move(groups), std::move(templates), split);
}

LabeledDataset group_fixed(std::span<const LogRecord> records, std::span<const EventIndex> events,
                           std::shared_ptr<const TemplateSet> templates, std::size_t window_size,
                           const LabelSource& labels, double train_ratio, GroupingStats* stats) {
    if (records.size() != events.size()) throw Error("records and events differ in length");
    if (window_size == 0) throw UsageError("window size must be at least 1");
    if (labels.kind != LabelKind::per_line_prefix) throw UsageError("fixed windows need per-line labels");
    GroupingStats local;
    std::vector<EventGroup> groups;
    EventGroup current;
    auto flush = [&] {
        current.group_id = std::to_string(groups.size());
        groups.push_back(std::move(current));
        current = EventGroup{};
    };
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (events[i] == kNoEvent) {
            ++local.dropped_records;
            continue;
        }
        current.events.push_back(events[i]);
        current.line_indices.push_back(records[i].line_index);
        if (labels.line_label(records[i].line_index) == Label::anomalous) current.label = Label::anomalous;
        if (current.events.size() == window_size) flush();
    }
    if (!current.events.empty()) flush();
    if (stats) *stats = local;
    auto split = chronological_split(groups.size(), train_ratio);
    return LabeledDataset(std::move(groups), std::move(templates), split);
}

void write_groups(std::ostream& out, const LabeledDataset& dataset) {
    out << artifact_header("groups") << '\n';
    out << "#split " << dataset.split_point() << '\n';
    for (std::size_t g = 0; g < dataset.group_count(); ++g) {
        out << dataset.group_id(g) << '\t' << to_string(dataset.label(g)) << '\t';
        bool first = true;
        dataset.for_each_event(g, [&](EventIndex e) {
            if (!first) out << ' ';
            first = false;
            out << dataset.event_id(e);
        });
        out << '\n';
    }
}

LabeledDataset read_groups(std::istream& in, std::shared_ptr<const TemplateSet> templates) {
    expect_artifact_header(in, "groups");
    std::vector<EventGroup> groups;
    std::optional<std::size_t> split;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (text::starts_with(line, "#split ")) split = text::parse_uint(std::string_view(line).substr(7));
            continue;
        }
        auto cells = text::split(line, '\t');
        if (cells.size() != 3) throw DataError("group line needs 3 tab-separated columns: '" + line + "'");
        EventGroup group;
        group.group_id = std::string(cells[0]);
        group.label = parse_label(cells[1]);
        for (auto id : text::split_whitespace(cells[2])) group.events.push_back(templates->require(id));
        groups.push_back(std::move(group));
    }
    std::size_t split_point = split ? *split : chronological_split(groups.size());
    return LabeledDataset(std::move(groups), std::move(templates), split_point);
}

void save_groups(const std::filesystem::path& path, const LabeledDataset& dataset) {
    auto out = open_output(path);
    write_groups(out, dataset);
}

LabeledDataset load_groups(const std::filesystem::path& path, std::shared_ptr<const TemplateSet> templates) {
    auto in = open_input(path);
    return read_groups(in, std::move(templates));
}

}  // namespace logcleaner
