#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logcleaner/detectors.hpp"
#include "logcleaner/profiler.hpp"
#include "logcleaner/study.hpp"
#include "logcleaner/template_miner.hpp"

namespace logcleaner {

/// Inference wall-clock of one eval run, kept apart from the metrics so those stay reproducible.
struct Timing {
    std::string tag;
    std::string model;
    std::size_t groups = 0;
    double inference_millis = 0.0;
};

void write_timing(std::ostream& out, const Timing& timing);
Timing read_timing(std::istream& in);

struct ReportInputs {
    std::vector<std::pair<std::string, EvalMetrics>> metrics;  // (tag, metrics)
    std::vector<ReductionTrace> traces;
    std::vector<ReducedEventSet> reduced;
    std::vector<Timing> timings;
    std::optional<TemplateSet> templates;  // supplies per-event line counts for reduced sets
};

/// Dispatches on each file's artifact header. Throws DataError on unknown kinds or versions.
ReportInputs load_report_inputs(std::span<const std::filesystem::path> paths);

enum class ReportFormat { text, csv };

struct AblationRow {
    std::string stage;
    double events_reduction = 0.0;
    std::optional<double> lines_reduction;
};

/// Cumulative rows none, +tfidf, +anti, +dup.
std::vector<AblationRow> ablation_rows(const ReducedEventSet& reduced, const TemplateSet* templates);

void write_report(std::ostream& out, const ReportInputs& inputs, ReportFormat format);

}  // namespace logcleaner
