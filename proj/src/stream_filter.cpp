#include "logcleaner/stream_filter.hpp"

#include <istream>
#include <ostream>
#include <system_error>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

namespace {

std::atomic<bool> stats_requested{false};
static_assert(std::atomic<bool>::is_always_lock_free);

double fraction(std::uint64_t part, std::uint64_t whole) {
    return whole == 0 ? 0.0 : static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

void request_stats_dump() noexcept { stats_requested.store(true, std::memory_order_relaxed); }

double FilterStats::lines_reduction() const { return fraction(lines_dropped, lines_in); }
double FilterStats::events_reduction() const { return fraction(events_removed, events_total); }

void FilterStats::write(std::ostream& out) const {
    out << "lines_in " << lines_in << '\n'
        << "lines_out " << lines_out << '\n'
        << "lines_dropped " << lines_dropped << '\n'
        << "lines_unmatched " << lines_unmatched << '\n';
    for (auto reason : {RemovalReason::sporadic, RemovalReason::anti, RemovalReason::duplicative})
        out << "dropped_" << to_string(reason) << ' ' << dropped_by_reason[static_cast<std::size_t>(reason)] << '\n';
    out << "events_total " << events_total << '\n'
        << "events_removed " << events_removed << '\n'
        << "events_reduction_pct " << text::format_double(100.0 * events_reduction()) << '\n'
        << "lines_reduction_pct " << text::format_double(100.0 * lines_reduction()) << '\n'
        << "reloads " << reloads << '\n'
        << "reduced_hash " << reduced_hash << '\n';
}

FilterPlan::FilterPlan(std::shared_ptr<const TemplateSet> templates, ReducedEventSet reduced)
    : templates_(std::move(templates)), reduced_(std::move(reduced)) {
    if (!templates_) throw DataError("filter plan needs a template set");
    removal_.assign(templates_->size(), std::nullopt);
    std::vector<bool> seen(templates_->size(), false);
    for (const auto& d : reduced_.events()) {
        auto idx = templates_->index_of(d.event_id);
        if (!idx) throw DataError("reduced event set names " + d.event_id + ", which the template set lacks");
        if ((*templates_)[*idx].text() != d.template_text)
            throw DataError("reduced event set template for " + d.event_id + " differs from the template set");
        seen[*idx] = true;
        removal_[*idx] = d.removed;
    }
    for (EventIndex e = 0; e < seen.size(); ++e)
        if (!seen[e]) throw DataError("reduced event set does not cover template " + (*templates_)[e].event_id);
    hash_ = reduced_.content_hash();
}

StreamFilter::StreamFilter(std::shared_ptr<const TemplateSet> templates, ReducedEventSet reduced,
                           HeaderFormat format)
    : templates_(std::move(templates)), format_(std::move(format)) {
    plan_ = std::make_shared<const FilterPlan>(templates_, std::move(reduced));
    stats_.events_total = templates_->size();
    stats_.events_removed = plan_->reduced().removed_count();
    stats_.reduced_hash = plan_->hash();
}

std::shared_ptr<const FilterPlan> StreamFilter::plan() const {
    std::lock_guard lock(plan_mutex_);
    return plan_;
}

bool StreamFilter::accept(std::string_view line) {
    auto plan = this->plan();
    std::string_view trimmed = line;
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.remove_suffix(1);
    auto content = text::sanitize_utf8(format_.content_of(trimmed));
    auto event = plan->templates().match(content);
    std::optional<RemovalReason> reason;
    if (event) reason = plan->removal(*event);

    std::lock_guard lock(stats_mutex_);
    ++stats_.lines_in;
    if (!event) ++stats_.lines_unmatched;
    if (reason) {
        ++stats_.lines_dropped;
        ++stats_.dropped_by_reason[static_cast<std::size_t>(*reason)];
        return false;
    }
    ++stats_.lines_out;
    return true;
}

FilterStats StreamFilter::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

ReloadOutcome StreamFilter::reload(ReducedEventSet reduced) {
    std::shared_ptr<const FilterPlan> next;
    try {
        next = std::make_shared<const FilterPlan>(templates_, std::move(reduced));
    } catch (const Error& e) {
        return {false, e.what()};
    }
    {
        std::lock_guard lock(plan_mutex_);
        plan_ = next;
    }
    std::lock_guard lock(stats_mutex_);
    ++stats_.reloads;
    stats_.events_removed = next->reduced().removed_count();
    stats_.reduced_hash = next->hash();
    return {true, "reloaded " + next->hash()};
}

ReloadOutcome StreamFilter::reload(const std::filesystem::path& reduced_path) {
    try {
        return reload(ReducedEventSet::load(reduced_path));
    } catch (const Error& e) {
        return {false, e.what()};
    }
}

void StreamFilter::poll_control(const StreamOptions& options) {
    if (stats_requested.exchange(false, std::memory_order_relaxed) && options.stats_out) {
        stats().write(*options.stats_out);
        options.stats_out->flush();
    }
    if (!options.control_file) return;
    std::error_code ec;
    if (!std::filesystem::exists(*options.control_file, ec)) return;
    std::vector<std::string> requests;
    {
        std::ifstream in(*options.control_file);
        std::string line;
        while (std::getline(in, line))
            if (!text::trim(line).empty()) requests.emplace_back(text::trim(line));
    }
    std::filesystem::remove(*options.control_file, ec);
    for (const auto& request : requests) {
        std::string message;
        if (request == "stats") {
            if (options.stats_out) stats().write(*options.stats_out);
            continue;
        }
        if (text::starts_with(request, "reload ")) {
            auto outcome = reload(std::filesystem::path(std::string(text::trim(request.substr(7)))));
            message = (outcome.ok ? "" : "reload rejected: ") + outcome.message;
        } else {
            message = "unknown control request '" + request + "'";
        }
        if (options.stats_out) *options.stats_out << "# " << message << '\n';
    }
    if (options.stats_out) options.stats_out->flush();
}

void StreamFilter::run(std::istream& in, std::ostream& out, const StreamOptions& options) {
    const std::uint64_t every = options.poll_every == 0 ? 1 : options.poll_every;
    std::string line;
    std::uint64_t n = 0;
    poll_control(options);
    while (std::getline(in, line)) {
        if (accept(line)) out << line << '\n';
        if (++n % every == 0) poll_control(options);
        else if (stats_requested.load(std::memory_order_relaxed)) poll_control(options);
    }
    out.flush();
    if (options.stats_out) {
        stats().write(*options.stats_out);
        options.stats_out->flush();
    }
}

void write_reload_request(const std::filesystem::path& control_file, const std::filesystem::path& reduced_path,
                          const TemplateSet& templates) {
    auto reduced = ReducedEventSet::load(reduced_path);
    FilterPlan check(std::make_shared<const TemplateSet>(templates), std::move(reduced));
    auto absolute = std::filesystem::absolute(reduced_path);
    auto tmp = control_file;
    tmp += ".tmp";
    {
        auto out = open_output(tmp);
        out << "reload " << absolute.string() << '\n';
    }
    std::filesystem::rename(tmp, control_file);
}

}  // namespace logcleaner
