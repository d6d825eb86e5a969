#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/ingest.hpp"
#include "logcleaner/profiler.hpp"
#include "logcleaner/template_miner.hpp"

namespace logcleaner {

struct FilterStats {
    std::uint64_t lines_in = 0;
    std::uint64_t lines_out = 0;  // includes unmatched lines
    std::uint64_t lines_dropped = 0;
    std::uint64_t lines_unmatched = 0;
    std::array<std::uint64_t, 3> dropped_by_reason{};  // indexed by RemovalReason
    std::uint64_t events_total = 0;
    std::uint64_t events_removed = 0;
    std::uint64_t reloads = 0;
    std::string reduced_hash;

    double lines_reduction() const;
    double events_reduction() const;

    void write(std::ostream& out) const;
};

/// A reduced event set resolved against the template set it was profiled from.
class FilterPlan {
public:
    /// Throws DataError when the reduced set does not describe exactly these templates.
    FilterPlan(std::shared_ptr<const TemplateSet> templates, ReducedEventSet reduced);

    const TemplateSet& templates() const { return *templates_; }
    const ReducedEventSet& reduced() const { return reduced_; }
    std::optional<RemovalReason> removal(EventIndex e) const { return removal_[e]; }
    const std::string& hash() const { return hash_; }

private:
    std::shared_ptr<const TemplateSet> templates_;
    ReducedEventSet reduced_;
    std::vector<std::optional<RemovalReason>> removal_;
    std::string hash_;
};

struct ReloadOutcome {
    bool ok = false;
    std::string message;
};

struct StreamOptions {
    /// Control file polled between lines; holds `reload <path>` or `stats` and is deleted once read.
    std::optional<std::filesystem::path> control_file;
    std::uint64_t poll_every = 1000;
    std::ostream* stats_out = nullptr;  // on-demand and end-of-stream stats
};

/// Fail-open line filter: a line is dropped only when it matches a removed event. The active plan
/// is swapped whole, so every line is judged by exactly one plan.
class StreamFilter {
public:
    StreamFilter(std::shared_ptr<const TemplateSet> templates, ReducedEventSet reduced, HeaderFormat format = {});

    /// True when the line should be emitted.
    bool accept(std::string_view line);

    void run(std::istream& in, std::ostream& out, const StreamOptions& options = {});

    /// Keeps the current plan when the file does not load or does not fit the templates.
    ReloadOutcome reload(const std::filesystem::path& reduced_path);
    ReloadOutcome reload(ReducedEventSet reduced);

    FilterStats stats() const;
    std::shared_ptr<const FilterPlan> plan() const;

private:
    void poll_control(const StreamOptions& options);

    std::shared_ptr<const TemplateSet> templates_;
    HeaderFormat format_;
    mutable std::mutex plan_mutex_;
    std::shared_ptr<const FilterPlan> plan_;
    mutable std::mutex stats_mutex_;
    FilterStats stats_;
};

/// Async-signal-safe: asks running filters to print their stats after the current line.
void request_stats_dump() noexcept;

/// Writes a control request for a running filter; the reduced file is validated first.
void write_reload_request(const std::filesystem::path& control_file, const std::filesystem::path& reduced_path,
                          const TemplateSet& templates);

}  // namespace logcleaner
