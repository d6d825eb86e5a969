#include "logcleaner/study.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/kmeans.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

namespace {

constexpr double kTolerance = 1e-12;

std::vector<EventIndex> order_candidates(const LabeledDataset& dataset, CandidateOrder order) {
    auto events = dataset.active_events();
    switch (order) {
        case CandidateOrder::frequency_desc:
            std::stable_sort(events.begin(), events.end(), [&](EventIndex a, EventIndex b) {
                return dataset.occurrences(a) > dataset.occurrences(b);
            });
            break;
        case CandidateOrder::frequency_asc:
            std::stable_sort(events.begin(), events.end(), [&](EventIndex a, EventIndex b) {
                return dataset.occurrences(a) < dataset.occurrences(b);
            });
            break;
        case CandidateOrder::ordinal:
            break;
    }
    return events;
}

Score trial_score(const LabeledDataset& view, const ModelSpec& model, std::uint64_t seed) {
    try {
        return Score::of(train_and_evaluate(view, model, seed));
    } catch (const DataError&) {
        return {};
    }
}

std::uint64_t line_count(const LabeledDataset& dataset, std::span<const EventIndex> events) {
    std::uint64_t n = 0;
    for (auto e : events) n += dataset.occurrences(e);
    return n;
}

}  // namespace

std::string_view to_string(CandidateOrder order) {
    switch (order) {
        case CandidateOrder::frequency_desc: return "frequency-desc";
        case CandidateOrder::frequency_asc: return "frequency-asc";
        case CandidateOrder::ordinal: return "ordinal";
    }
    return "frequency-desc";
}

CandidateOrder parse_candidate_order(std::string_view text) {
    if (text == "frequency-desc") return CandidateOrder::frequency_desc;
    if (text == "frequency-asc") return CandidateOrder::frequency_asc;
    if (text == "ordinal") return CandidateOrder::ordinal;
    throw UsageError("unknown candidate order '" + std::string(text) + "'");
}

double ReductionTrace::events_reduction() const {
    return events_total == 0 ? 0.0 : static_cast<double>(events_removed()) / static_cast<double>(events_total);
}

double ReductionTrace::lines_reduction() const {
    return lines_total == 0 ? 0.0 : static_cast<double>(lines_removed) / static_cast<double>(lines_total);
}

bool ReductionTrace::sound() const {
    if (final_score.f1 >= (1.0 - alpha) * baseline.f1 - kTolerance) return true;
    for (std::size_t i = 1; i < f1_max_history.size(); ++i) {
        if (f1_max_history[i] < f1_max_history[i - 1] - kTolerance) return false;
        if (f1_max_history[i] < baseline.f1 - kTolerance) return false;
    }
    return true;
}

ReductionTrace retry_reduce(const LabeledDataset& dataset, const ModelSpec& model, const RetryOptions& options) {
    if (!(options.alpha >= 0.0 && options.alpha < 1.0)) throw UsageError("alpha must be in [0, 1)");
    ReductionTrace trace;
    trace.alpha = options.alpha;
    trace.model = model.name();
    trace.seed = options.seed;

    EvalMetrics base;
    try {
        base = train_and_evaluate(dataset, model, options.seed);
    } catch (const DataError& e) {
        throw DataError(std::string("baseline training failed: ") + e.what());
    }
    trace.baseline = trace.unreduced = trace.final_score = Score::of(base);
    double f1_max = base.f1;
    trace.f1_max_history.push_back(f1_max);

    auto candidates = order_candidates(dataset, options.order);
    trace.events_total = candidates.size();
    trace.lines_total = line_count(dataset, candidates);

    LabeledDataset current = dataset;
    bool progress = true;
    while (progress && !candidates.empty()) {
        progress = false;
        std::vector<EventIndex> reinstated;
        for (EventIndex e : candidates) {
            auto view = current.remove_event(e);
            Score s = trial_score(view, model, options.seed);
            TraceStep step{dataset.event_id(e), StepAction::removed, s, f1_max};
            if (s.f1 < (1.0 - options.alpha) * f1_max) {
                step.action = StepAction::reinstated;
                reinstated.push_back(e);
            } else {
                current = std::move(view);
                f1_max = s.f1;
                trace.f1_max_history.push_back(f1_max);
                trace.final_score = s;
                trace.lines_removed += dataset.occurrences(e);
                progress = true;
            }
            trace.steps.push_back(std::move(step));
        }
        candidates = std::move(reinstated);
        if (!options.multi_pass) break;
    }

    for (EventIndex e : current.active_events()) trace.surviving_events.push_back(dataset.event_id(e));
    return trace;
}

std::vector<SingleEventScore> single_event_scores(const LabeledDataset& dataset, const ModelSpec& model,
                                                  std::uint64_t seed) {
    std::vector<SingleEventScore> out;
    for (EventIndex e : dataset.active_events()) {
        EventIndex only[] = {e};
        out.push_back({dataset.event_id(e), trial_score(dataset.keep_only(only), model, seed), false});
    }
    return out;
}

std::optional<std::vector<bool>> relevant_by_kmeans(std::span<const SingleEventScore> scores, std::size_t restarts,
                                                    std::size_t max_iterations, std::uint64_t seed) {
    std::vector<Point> points;
    for (const auto& s : scores) points.push_back({s.score.precision, s.score.recall, s.score.f1});
    if (points.size() < 2 || std::all_of(points.begin(), points.end(), [&](const Point& p) { return p == points[0]; }))
        return std::nullopt;
    auto result = kmeans(points, {2, restarts, max_iterations, seed});
    const auto& a = result.centroids[0];
    const auto& b = result.centroids[1];
    // centroid layout is (P, R, F1); compare F1 first
    bool first = std::tie(a[2], a[0], a[1]) >= std::tie(b[2], b[0], b[1]);
    std::size_t relevant_cluster = first ? 0 : 1;
    std::vector<bool> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = result.assignment[i] == relevant_cluster;
    return out;
}

ClusterReduction cluster_reduce(const LabeledDataset& dataset, const ModelSpec& model, const ClusterOptions& options) {
    if (dataset.active_count() < 2) throw UsageError("the clustering approach needs at least two events");
    ClusterReduction out;
    auto scores = single_event_scores(dataset, model, options.retry.seed);
    auto relevant = relevant_by_kmeans(scores, options.restarts, options.max_iterations, options.retry.seed);
    if (!relevant) {
        out.warnings.push_back("single-event scores are all identical; treating every event as relevant");
        relevant = std::vector<bool>(scores.size(), true);
    }

    auto active = dataset.active_events();
    std::vector<EventIndex> keep;
    std::vector<EventIndex> pruned;
    for (std::size_t i = 0; i < active.size(); ++i) {
        scores[i].relevant = (*relevant)[i];
        ((*relevant)[i] ? keep : pruned).push_back(active[i]);
        if ((*relevant)[i]) out.relevant.push_back(scores[i].event_id);
    }

    EvalMetrics unreduced;
    try {
        unreduced = train_and_evaluate(dataset, model, options.retry.seed);
    } catch (const DataError& e) {
        throw DataError(std::string("baseline training failed: ") + e.what());
    }
    out.trace = retry_reduce(dataset.keep_only(keep), model, options.retry);
    auto& trace = out.trace;
    trace.method = "cluster";
    trace.unreduced = Score::of(unreduced);
    trace.single_event_scores = std::move(scores);
    for (auto e : pruned) trace.pruned_events.push_back(dataset.event_id(e));
    trace.events_total += pruned.size();
    const auto pruned_lines = line_count(dataset, pruned);
    trace.lines_total += pruned_lines;
    trace.lines_removed += pruned_lines;
    return out;
}

std::string_view to_string(Category c) {
    switch (c) {
        case Category::key: return "key";
        case Category::anti: return "anti";
        case Category::duplicative: return "duplicative";
    }
    return "key";
}

Category parse_category(std::string_view text) {
    if (text == "key") return Category::key;
    if (text == "anti") return Category::anti;
    if (text == "duplicative") return Category::duplicative;
    throw DataError("unknown event category '" + std::string(text) + "'");
}

std::vector<EventCategory> categorize_events(const ReductionTrace& trace, double epsilon) {
    auto removal = [&](const std::string& id, double delta, std::string evidence) {
        return EventCategory{id, delta > epsilon ? Category::anti : Category::duplicative, delta, std::move(evidence)};
    };
    std::vector<EventCategory> out;
    for (const auto& id : trace.surviving_events) out.push_back({id, Category::key, 0.0, "retained"});
    for (const auto& step : trace.steps) {
        if (step.action == StepAction::removed)
            out.push_back(removal(step.event_id, step.delta_f1(), "removed"));
    }
    for (const auto& id : trace.pruned_events) out.push_back(removal(id, trace.pruned_delta_f1(), "pruned"));
    return out;
}

// --- files -----------------------------------------------------------------

namespace {

std::string score_text(const Score& s) {
    return text::format_double(s.precision) + ' ' + text::format_double(s.recall) + ' ' + text::format_double(s.f1);
}

Score parse_score(std::span<const std::string_view> v, std::size_t at) {
    if (v.size() < at + 3) throw DataError("trace: score needs three values");
    return {text::parse_double(v[at]), text::parse_double(v[at + 1]), text::parse_double(v[at + 2])};
}

void write_list(std::ostream& out, std::string_view key, const std::vector<std::string>& ids) {
    out << key;
    for (const auto& id : ids) out << ' ' << id;
    out << '\n';
}

}  // namespace

void write_trace(std::ostream& out, const ReductionTrace& trace) {
    out << artifact_header("trace") << '\n';
    out << "alpha " << text::format_double(trace.alpha) << '\n';
    out << "method " << trace.method << '\n';
    out << "model " << trace.model << '\n';
    out << "seed " << trace.seed << '\n';
    out << "unreduced " << score_text(trace.unreduced) << '\n';
    out << "baseline " << score_text(trace.baseline) << '\n';
    for (const auto& s : trace.single_event_scores)
        out << "score " << s.event_id << ' ' << score_text(s.score) << ' ' << (s.relevant ? "relevant" : "irrelevant")
            << '\n';
    write_list(out, "pruned", trace.pruned_events);
    for (const auto& s : trace.steps)
        out << "step " << s.event_id << ' ' << (s.action == StepAction::removed ? "removed" : "reinstated") << ' '
            << score_text(s.score) << ' ' << text::format_double(s.f1_max) << '\n';
    out << "f1max";
    for (double v : trace.f1_max_history) out << ' ' << text::format_double(v);
    out << '\n';
    write_list(out, "surviving", trace.surviving_events);
    out << "events_total " << trace.events_total << '\n';
    out << "events_removed " << trace.events_removed() << '\n';
    out << "lines_total " << trace.lines_total << '\n';
    out << "lines_removed " << trace.lines_removed << '\n';
    out << "final " << score_text(trace.final_score) << '\n';
}

ReductionTrace read_trace(std::istream& in) {
    expect_artifact_header(in, "trace");
    ReductionTrace t;
    std::string line;
    bool saw_final = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        auto v = text::split_whitespace(line);
        auto key = v.front();
        auto one = [&] {
            if (v.size() != 2) throw DataError("trace: '" + std::string(key) + "' needs one value");
            return v[1];
        };
        if (key == "alpha") t.alpha = text::parse_double(one());
        else if (key == "method") t.method = std::string(one());
        else if (key == "model") t.model = std::string(line.substr(6));
        else if (key == "seed") t.seed = text::parse_uint(one());
        else if (key == "unreduced") t.unreduced = parse_score(v, 1);
        else if (key == "baseline") t.baseline = parse_score(v, 1);
        else if (key == "score") {
            if (v.size() != 6) throw DataError("trace: bad score line");
            t.single_event_scores.push_back({std::string(v[1]), parse_score(v, 2), v[5] == "relevant"});
        } else if (key == "pruned") {
            for (std::size_t i = 1; i < v.size(); ++i) t.pruned_events.emplace_back(v[i]);
        } else if (key == "step") {
            if (v.size() != 7 || (v[2] != "removed" && v[2] != "reinstated")) throw DataError("trace: bad step line");
            t.steps.push_back({std::string(v[1]), v[2] == "removed" ? StepAction::removed : StepAction::reinstated,
                               parse_score(v, 3), text::parse_double(v[6])});
        } else if (key == "f1max") {
            for (std::size_t i = 1; i < v.size(); ++i) t.f1_max_history.push_back(text::parse_double(v[i]));
        } else if (key == "surviving") {
            for (std::size_t i = 1; i < v.size(); ++i) t.surviving_events.emplace_back(v[i]);
        } else if (key == "events_total") t.events_total = text::parse_uint(one());
        else if (key == "events_removed") {
            (void)one();
        } else if (key == "lines_total") t.lines_total = text::parse_uint(one());
        else if (key == "lines_removed") t.lines_removed = text::parse_uint(one());
        else if (key == "final") {
            t.final_score = parse_score(v, 1);
            saw_final = true;
        } else throw DataError("trace: unknown key '" + std::string(key) + "'");
    }
    if (!saw_final) throw DataError("trace is truncated");
    if (t.surviving_events.size() > t.events_total) throw DataError("trace: more survivors than events");
    return t;
}

void save_trace(const std::filesystem::path& path, const ReductionTrace& trace) {
    auto out = open_output(path);
    write_trace(out, trace);
}

ReductionTrace load_trace(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_trace(in);
}

void write_categories(std::ostream& out, std::span<const EventCategory> categories) {
    out << artifact_header("categories") << '\n';
    for (const auto& c : categories)
        out << c.event_id << '\t' << to_string(c.category) << '\t' << text::format_double(c.delta_f1) << '\t'
            << c.evidence << '\n';
}

std::vector<EventCategory> read_categories(std::istream& in) {
    expect_artifact_header(in, "categories");
    std::vector<EventCategory> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        auto v = text::split(line, '\t');
        if (v.size() != 4) throw DataError("categories: expected 4 tab-separated fields");
        out.push_back({std::string(v[0]), parse_category(v[1]), text::parse_double(v[2]), std::string(v[3])});
    }
    return out;
}

void write_study_summary(std::ostream& out, const ReductionTrace& trace, std::span<const EventCategory> categories) {
    auto pct = [](double f) { return text::format_double(std::round(f * 10000.0) / 100.0) + "%"; };
    out << "method " << trace.method << ", model " << trace.model << ", alpha " << text::format_double(trace.alpha)
        << '\n';
    out << "events reduced: " << trace.events_removed() << '/' << trace.events_total << " ("
        << pct(trace.events_reduction()) << ")\n";
    out << "lines reduced:  " << trace.lines_removed << '/' << trace.lines_total << " (" << pct(trace.lines_reduction())
        << ")\n";
    out << "F1 unreduced " << text::format_double(trace.unreduced.f1) << ", baseline "
        << text::format_double(trace.baseline.f1) << ", final " << text::format_double(trace.final_score.f1) << '\n';
    std::size_t counts[3] = {0, 0, 0};
    for (const auto& c : categories) ++counts[static_cast<int>(c.category)];
    out << "key " << counts[0] << ", anti " << counts[1] << ", duplicative " << counts[2] << '\n';
    out << "event\tcategory\tdelta_f1\n";
    for (const auto& c : categories)
        out << c.event_id << '\t' << to_string(c.category) << '\t' << text::format_double(c.delta_f1) << '\n';
}

}  // namespace logcleaner
