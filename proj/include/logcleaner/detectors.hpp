#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/grouper.hpp"
#include "logcleaner/types.hpp"

namespace logcleaner {

/// Event-count vectors, one row per group, columns in template order restricted to the
/// dataset's active events.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::vector<std::string> column_ids;
    std::vector<double> values;  // row-major
    std::vector<Label> labels;

    std::size_t cols() const { return column_ids.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
    FeatureMatrix slice(std::size_t begin, std::size_t end) const;
    std::size_t column_of(std::string_view event_id) const;
};

FeatureMatrix featurize(const LabeledDataset& dataset);
FeatureMatrix featurize(const LabeledDataset& dataset, std::size_t begin, std::size_t end);

struct TrainTestFeatures {
    FeatureMatrix train;
    FeatureMatrix test;
};

TrainTestFeatures split_features(const LabeledDataset& dataset);

enum class ModelKind { logistic_regression, linear_svm, decision_tree, isolation_forest, single_event, external };

std::string_view to_string(ModelKind kind);

struct Hyperparameters {
    // logistic regression: full-batch gradient descent
    std::size_t lr_epochs = 500;
    double lr_learning_rate = 0.1;
    double lr_l2 = 1e-4;
    // linear SVM: Pegasos
    double svm_lambda = 1e-4;
    std::size_t svm_epochs = 20;
    // CART
    std::size_t tree_max_depth = 10;
    std::size_t tree_min_samples_split = 2;
    // isolation forest
    std::size_t forest_trees = 100;
    std::size_t forest_subsample = 256;
    double forest_threshold = 0.5;
};

/// What to train: `lr`, `svm`, `dt`, `iforest`, `single:<event id>` or `external:<command>`.
struct ModelSpec {
    ModelKind kind = ModelKind::decision_tree;
    std::string event_id;  // single_event
    std::string command;   // external
    Hyperparameters params;

    static ModelSpec parse(std::string_view text);
    std::string name() const;
    bool supervised() const;
};

/// A trained, immutable detector. predict is safe to call concurrently.
class Model {
public:
    virtual ~Model() = default;
    virtual ModelKind kind() const = 0;
    virtual std::vector<Label> predict(const FeatureMatrix& features) const = 0;
    virtual void save(std::ostream& out) const = 0;

    std::size_t width() const { return column_ids_.size(); }
    const std::vector<std::string>& column_ids() const { return column_ids_; }

protected:
    std::vector<std::string> column_ids_;
};

/// Deterministic for a fixed seed. Supervised kinds need both classes in the slice.
std::unique_ptr<Model> train(const ModelSpec& spec, const FeatureMatrix& train_slice, std::uint64_t seed);

struct Prediction {
    std::vector<Label> labels;
    double inference_millis = 0.0;
};

/// Times the prediction pass only. Throws DataError when the width differs from training.
Prediction predict(const Model& model, const FeatureMatrix& features);

void save_model(const std::filesystem::path& path, const Model& model);
void write_model(std::ostream& out, const Model& model);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);
std::unique_ptr<Model> read_model(std::istream& in);

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
};

/// Anomaly-class metrics. Zero denominators give 0.
struct EvalMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double inference_millis = 0.0;
    Confusion counts;
};

EvalMetrics metrics_from_confusion(const Confusion& counts);
EvalMetrics evaluate(std::span<const Label> predicted, std::span<const Label> truth);

/// Trains on the train slice, predicts the test slice and scores it.
EvalMetrics train_and_evaluate(const LabeledDataset& dataset, const ModelSpec& spec, std::uint64_t seed);

/// `#logcleaner-metrics v1` key-value file. Timing is kept out so reruns stay byte-identical.
void write_metrics(std::ostream& out, const EvalMetrics& metrics, std::string_view tag);
EvalMetrics read_metrics(std::istream& in, std::string* tag = nullptr);

}  // namespace logcleaner
