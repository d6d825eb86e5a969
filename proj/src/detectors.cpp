#include "logcleaner/detectors.hpp"

#include <chrono>
#include <istream>
#include <ostream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

FeatureMatrix FeatureMatrix::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows) throw Error("feature slice out of range");
    FeatureMatrix out;
    out.rows = end - begin;
    out.column_ids = column_ids;
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin * cols()),
                      values.begin() + static_cast<std::ptrdiff_t>(end * cols()));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin),
                      labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::size_t FeatureMatrix::column_of(std::string_view event_id) const {
    for (std::size_t c = 0; c < column_ids.size(); ++c)
        if (column_ids[c] == event_id) return c;
    return static_cast<std::size_t>(-1);
}

FeatureMatrix featurize(const LabeledDataset& dataset, std::size_t begin, std::size_t end) {
    if (begin > end || end > dataset.group_count()) throw Error("featurize range out of bounds");
    FeatureMatrix m;
    std::vector<std::size_t> column(dataset.event_count(), static_cast<std::size_t>(-1));
    for (EventIndex e : dataset.active_events()) {
        column[e] = m.column_ids.size();
        m.column_ids.push_back(dataset.event_id(e));
    }
    const std::size_t width = m.column_ids.size();
    m.rows = end - begin;
    m.values.assign(m.rows * width, 0.0);
    m.labels.reserve(m.rows);
    for (std::size_t g = begin; g < end; ++g) {
        double* row = m.values.data() + (g - begin) * width;
        dataset.for_each_event(g, [&](EventIndex e) { row[column[e]] += 1.0; });
        m.labels.push_back(dataset.label(g));
    }
    return m;
}

FeatureMatrix featurize(const LabeledDataset& dataset) { return featurize(dataset, 0, dataset.group_count()); }

TrainTestFeatures split_features(const LabeledDataset& dataset) {
    auto all = featurize(dataset);
    return {all.slice(0, dataset.split_point()), all.slice(dataset.split_point(), all.rows)};
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::logistic_regression: return "lr";
        case ModelKind::linear_svm: return "svm";
        case ModelKind::decision_tree: return "dt";
        case ModelKind::isolation_forest: return "iforest";
        case ModelKind::single_event: return "single";
        case ModelKind::external: return "external";
    }
    return "dt";
}

ModelSpec ModelSpec::parse(std::string_view text) {
    ModelSpec spec;
    auto colon = text.find(':');
    auto head = text.substr(0, colon);
    if (head == "lr" || head == "logistic-regression") {
        spec.kind = ModelKind::logistic_regression;
    } else if (head == "svm" || head == "linear-svm") {
        spec.kind = ModelKind::linear_svm;
    } else if (head == "dt" || head == "decision-tree") {
        spec.kind = ModelKind::decision_tree;
    } else if (head == "iforest" || head == "isolation-forest") {
        spec.kind = ModelKind::isolation_forest;
    } else if (head == "single" || head == "single-event") {
        spec.kind = ModelKind::single_event;
        if (colon == std::string_view::npos || colon + 1 == text.size())
            throw UsageError("single-event model needs an event id, e.g. single:E3");
        spec.event_id = std::string(text.substr(colon + 1));
    } else if (head == "external") {
        spec.kind = ModelKind::external;
        if (colon == std::string_view::npos || colon + 1 == text.size())
            throw UsageError("external model needs a command, e.g. external:./detect.sh");
        spec.command = std::string(text.substr(colon + 1));
    } else {
        throw UsageError("unknown model '" + std::string(text) + "' (lr|svm|dt|iforest|single:<E>|external:<cmd>)");
    }
    if (colon != std::string_view::npos && spec.kind != ModelKind::single_event && spec.kind != ModelKind::external)
        throw UsageError("model '" + std::string(head) + "' takes no argument");
    return spec;
}

std::string ModelSpec::name() const {
    switch (kind) {
        case ModelKind::single_event: return "single:" + event_id;
        case ModelKind::external: return "external:" + command;
        default: return std::string(to_string(kind));
    }
}

bool ModelSpec::supervised() const {
    return kind == ModelKind::logistic_regression || kind == ModelKind::linear_svm ||
           kind == ModelKind::decision_tree;
}

Prediction predict(const Model& model, const FeatureMatrix& features) {
    if (features.cols() != model.width())
        throw DataError("feature width " + std::to_string(features.cols()) + " differs from trained width " +
                        std::to_string(model.width()));
    Prediction out;
    auto start = std::chrono::steady_clock::now();
    out.labels = model.predict(features);
    auto stop = std::chrono::steady_clock::now();
    out.inference_millis = std::chrono::duration<double, std::milli>(stop - start).count();
    return out;
}

EvalMetrics metrics_from_confusion(const Confusion& c) {
    EvalMetrics m;
    m.counts = c;
    const auto tp = static_cast<double>(c.tp);
    m.precision = c.tp + c.fp == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fp);
    m.recall = c.tp + c.fn == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

EvalMetrics evaluate(std::span<const Label> predicted, std::span<const Label> truth) {
    if (predicted.size() != truth.size())
        throw DataError("prediction count " + std::to_string(predicted.size()) + " differs from truth count " +
                        std::to_string(truth.size()));
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool p = predicted[i] == Label::anomalous;
        const bool t = truth[i] == Label::anomalous;
        if (p && t) ++c.tp;
        else if (p) ++c.fp;
        else if (t) ++c.fn;
        else ++c.tn;
    }
    return metrics_from_confusion(c);
}

EvalMetrics train_and_evaluate(const LabeledDataset& dataset, const ModelSpec& spec, std::uint64_t seed) {
    auto split = split_features(dataset);
    auto model = train(spec, split.train, seed);
    auto prediction = predict(*model, split.test);
    auto metrics = evaluate(prediction.labels, split.test.labels);
    metrics.inference_millis = prediction.inference_millis;
    return metrics;
}

void write_metrics(std::ostream& out, const EvalMetrics& m, std::string_view tag) {
    out << artifact_header("metrics") << '\n';
    out << "tag " << tag << '\n';
    out << "precision " << text::format_double(m.precision) << '\n';
    out << "recall " << text::format_double(m.recall) << '\n';
    out << "f1 " << text::format_double(m.f1) << '\n';
    out << "tp " << m.counts.tp << '\n';
    out << "fp " << m.counts.fp << '\n';
    out << "fn " << m.counts.fn << '\n';
    out << "tn " << m.counts.tn << '\n';
}

EvalMetrics read_metrics(std::istream& in, std::string* tag) {
    expect_artifact_header(in, "metrics");
    EvalMetrics m;
    std::string line;
    while (std::getline(in, line)) {
        auto sp = line.find(' ');
        if (line.empty() || line.front() == '#' || sp == std::string::npos) continue;
        auto key = std::string_view(line).substr(0, sp);
        auto value = std::string_view(line).substr(sp + 1);
        if (key == "tag" && tag) *tag = std::string(value);
        else if (key == "precision") m.precision = text::parse_double(value);
        else if (key == "recall") m.recall = text::parse_double(value);
        else if (key == "f1") m.f1 = text::parse_double(value);
        else if (key == "tp") m.counts.tp = text::parse_uint(value);
        else if (key == "fp") m.counts.fp = text::parse_uint(value);
        else if (key == "fn") m.counts.fn = text::parse_uint(value);
        else if (key == "tn") m.counts.tn = text::parse_uint(value);
    }
    return m;
}

}  // namespace logcleaner
