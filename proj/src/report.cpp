#include "logcleaner/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

void write_timing(std::ostream& out, const Timing& timing) {
    out << artifact_header("timing") << '\n'
        << "tag " << timing.tag << '\n'
        << "model " << timing.model << '\n'
        << "groups " << timing.groups << '\n'
        << "inference_ms " << text::format_double(timing.inference_millis) << '\n';
}

Timing read_timing(std::istream& in) {
    expect_artifact_header(in, "timing");
    Timing t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        auto space = line.find(' ');
        auto key = std::string_view(line).substr(0, space);
        auto value = space == std::string::npos ? std::string_view() : std::string_view(line).substr(space + 1);
        if (key == "tag") t.tag = value;
        else if (key == "model") t.model = value;
        else if (key == "groups") t.groups = text::parse_uint(value);
        else if (key == "inference_ms") t.inference_millis = text::parse_double(value);
        else throw DataError("timing: unknown key '" + std::string(key) + "'");
    }
    return t;
}

ReportInputs load_report_inputs(std::span<const std::filesystem::path> paths) {
    ReportInputs inputs;
    for (const auto& path : paths) {
        const auto header = read_artifact_header(path);
        if (header.version != kArtifactVersion)
            throw DataError(path.string() + ": artifact version " + header.version + " is not " +
                            std::string(kArtifactVersion));
        auto in = open_input(path);
        if (header.kind == "metrics") {
            std::string tag;
            auto m = read_metrics(in, &tag);
            inputs.metrics.emplace_back(tag.empty() ? path.stem().string() : tag, m);
        } else if (header.kind == "trace") {
            inputs.traces.push_back(read_trace(in));
        } else if (header.kind == "reduced") {
            inputs.reduced.push_back(ReducedEventSet::read(in));
        } else if (header.kind == "timing") {
            inputs.timings.push_back(read_timing(in));
        } else if (header.kind == "templates") {
            inputs.templates = TemplateSet::read(in);
        } else {
            throw DataError(path.string() + ": no report section for '" + header.kind + "' artifacts");
        }
    }
    return inputs;
}

std::vector<AblationRow> ablation_rows(const ReducedEventSet& reduced, const TemplateSet* templates) {
    const auto& events = reduced.events();
    const double total = static_cast<double>(events.size());
    std::uint64_t total_lines = 0;
    std::vector<std::uint64_t> lines(events.size(), 0);
    if (templates) {
        for (std::size_t i = 0; i < events.size(); ++i) {
            auto idx = templates->index_of(events[i].event_id);
            if (!idx) throw DataError("template set lacks " + events[i].event_id);
            lines[i] = (*templates)[*idx].support;
            total_lines += lines[i];
        }
    }
    const std::pair<const char*, std::vector<RemovalReason>> stages[] = {
        {"none", {}},
        {"+tfidf", {RemovalReason::sporadic}},
        {"+anti", {RemovalReason::sporadic, RemovalReason::anti}},
        {"+dup", {RemovalReason::sporadic, RemovalReason::anti, RemovalReason::duplicative}},
    };
    std::vector<AblationRow> rows;
    for (const auto& [name, reasons] : stages) {
        std::size_t removed = 0;
        std::uint64_t removed_lines = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& r = events[i].removed;
            if (r && std::find(reasons.begin(), reasons.end(), *r) != reasons.end()) {
                ++removed;
                removed_lines += lines[i];
            }
        }
        AblationRow row{name, total == 0 ? 0.0 : static_cast<double>(removed) / total, std::nullopt};
        if (templates)
            row.lines_reduction =
                total_lines == 0 ? 0.0 : static_cast<double>(removed_lines) / static_cast<double>(total_lines);
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::string pct(double f) { return text::format_double(std::round(f * 10000.0) / 100.0) + "%"; }
std::string num(double v) { return text::format_double(std::round(v * 10000.0) / 10000.0); }

/// Left-aligned columns for text output, comma-separated for CSV.
class Table {
public:
    Table(std::string title, std::vector<std::string> header) : title_(std::move(title)) {
        rows_.push_back(std::move(header));
    }
    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void write(std::ostream& out, ReportFormat format) const {
        if (rows_.size() == 1) return;
        if (format == ReportFormat::csv) {
            out << "# " << title_ << '\n';
            for (const auto& row : rows_) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
                out << '\n';
            }
            out << '\n';
            return;
        }
        std::vector<std::size_t> width(rows_.front().size(), 0);
        for (const auto& row : rows_)
            for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
        out << title_ << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << row[i];
                if (i + 1 < row.size()) out << std::string(width[i] - row[i].size() + 2, ' ');
            }
            out << '\n';
        }
        out << '\n';
    }

private:
    std::string title_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace

void write_report(std::ostream& out, const ReportInputs& inputs, ReportFormat format) {
    Table reduction("Reduction", {"source", "model", "events", "lines"});
    Table effect("Effectiveness before/after", {"source", "model", "P_before", "R_before", "F1_before", "P_after",
                                                 "R_after", "F1_after"});
    for (const auto& t : inputs.traces) {
        const auto source = t.method + " alpha=" + text::format_double(t.alpha);
        reduction.add({source, t.model, pct(t.events_reduction()), pct(t.lines_reduction())});
        effect.add({source, t.model, num(t.unreduced.precision), num(t.unreduced.recall), num(t.unreduced.f1),
                    num(t.final_score.precision), num(t.final_score.recall), num(t.final_score.f1)});
    }
    // the first metrics file is the reference every later one is compared against
    for (std::size_t i = 1; i < inputs.metrics.size(); ++i) {
        const auto& [before_tag, before] = inputs.metrics.front();
        const auto& [after_tag, after] = inputs.metrics[i];
        effect.add({before_tag + " -> " + after_tag, "-", num(before.precision), num(before.recall), num(before.f1),
                    num(after.precision), num(after.recall), num(after.f1)});
    }
    const TemplateSet* templates = inputs.templates ? &*inputs.templates : nullptr;
    Table ablation("Ablation (cumulative)", {"reduced_set", "stage", "events", "lines"});
    for (const auto& r : inputs.reduced) {
        auto rows = ablation_rows(r, templates);
        const auto& last = rows.back();
        reduction.add({"profile " + r.content_hash(), "-", pct(last.events_reduction),
                       last.lines_reduction ? pct(*last.lines_reduction) : "n/a"});
        for (const auto& row : rows)
            ablation.add({r.content_hash(), row.stage, pct(row.events_reduction),
                          row.lines_reduction ? pct(*row.lines_reduction) : "n/a"});
    }
    Table metrics("Metrics", {"tag", "precision", "recall", "f1", "tp", "fp", "fn", "tn"});
    for (const auto& [tag, m] : inputs.metrics)
        metrics.add({tag, num(m.precision), num(m.recall), num(m.f1), std::to_string(m.counts.tp),
                     std::to_string(m.counts.fp), std::to_string(m.counts.fn), std::to_string(m.counts.tn)});
    Table timing("Inference time", {"tag", "model", "groups", "inference_ms"});
    for (const auto& t : inputs.timings)
        timing.add({t.tag, t.model, std::to_string(t.groups), text::format_double(t.inference_millis)});

    reduction.write(out, format);
    effect.write(out, format);
    ablation.write(out, format);
    metrics.write(out, format);
    timing.write(out, format);
}

}  // namespace logcleaner
