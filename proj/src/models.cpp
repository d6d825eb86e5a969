#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "logcleaner/artifact.hpp"
#include "logcleaner/detectors.hpp"
#include "logcleaner/random.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

namespace {

void write_doubles(std::ostream& out, std::string_view key, const std::vector<double>& values) {
    out << key;
    for (double v : values) out << ' ' << text::format_double(v);
    out << '\n';
}

/// Line-oriented reader for `key value...` model bodies.
class Fields {
public:
    explicit Fields(std::istream& in) : in_(in) {}

    std::vector<std::string_view> expect(std::string_view key) {
        if (!std::getline(in_, line_)) throw DataError("model artifact truncated, expected '" + std::string(key) + "'");
        auto parts = text::split_whitespace(line_);
        if (parts.empty() || parts.front() != key)
            throw DataError("model artifact: expected '" + std::string(key) + "', got '" + line_ + "'");
        parts.erase(parts.begin());
        return parts;
    }

    std::string rest(std::string_view key) {
        expect(key);
        auto pos = line_.find(' ');
        return pos == std::string::npos ? std::string() : line_.substr(pos + 1);
    }

    std::vector<double> doubles(std::string_view key) {
        std::vector<double> out;
        for (auto v : expect(key)) out.push_back(text::parse_double(v));
        return out;
    }

    double one_double(std::string_view key) {
        auto v = doubles(key);
        if (v.size() != 1) throw DataError("model artifact: '" + std::string(key) + "' needs one value");
        return v.front();
    }

    std::uint64_t one_uint(std::string_view key) {
        auto v = expect(key);
        if (v.size() != 1) throw DataError("model artifact: '" + std::string(key) + "' needs one value");
        return text::parse_uint(v.front());
    }

private:
    std::istream& in_;
    std::string line_;
};

void require_both_classes(const FeatureMatrix& m, const ModelSpec& spec) {
    bool normal = false;
    bool anomalous = false;
    for (Label l : m.labels) (l == Label::anomalous ? anomalous : normal) = true;
    if (!anomalous) throw DataError(spec.name() + " training slice has no anomalous examples");
    if (!normal) throw DataError(spec.name() + " training slice has no normal examples");
}

/// Column standardization fitted on the training slice. Constant columns map to 0.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> scale;

    static Scaler fit(const FeatureMatrix& m) {
        Scaler s;
        const std::size_t d = m.cols();
        s.mean.assign(d, 0.0);
        s.scale.assign(d, 1.0);
        if (m.rows == 0) return s;
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < d; ++c) s.mean[c] += m.at(r, c);
        for (auto& v : s.mean) v /= static_cast<double>(m.rows);
        std::vector<double> var(d, 0.0);
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                double diff = m.at(r, c) - s.mean[c];
                var[c] += diff * diff;
            }
        for (std::size_t c = 0; c < d; ++c) {
            double sd = std::sqrt(var[c] / static_cast<double>(m.rows));
            s.scale[c] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    std::vector<double> transform(const FeatureMatrix& m) const {
        std::vector<double> out(m.values.size());
        const std::size_t d = m.cols();
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < d; ++c) out[r * d + c] = (m.at(r, c) - mean[c]) / scale[c];
        return out;
    }
};

double dot(const double* x, const std::vector<double>& w, std::size_t d) {
    double z = 0.0;
    for (std::size_t c = 0; c < d; ++c) z += w[c] * x[c];
    return z;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

/// Linear decision function over standardized features: anomalous iff w.x + b > 0.
class LinearModel : public Model {
public:
    LinearModel(ModelKind kind, std::vector<std::string> columns, Scaler scaler, std::vector<double> weights,
                double bias)
        : kind_(kind), scaler_(std::move(scaler)), weights_(std::move(weights)), bias_(bias) {
        column_ids_ = std::move(columns);
    }

    ModelKind kind() const override { return kind_; }

    std::vector<Label> predict(const FeatureMatrix& m) const override {
        auto x = scaler_.transform(m);
        std::vector<Label> out(m.rows);
        const std::size_t d = m.cols();
        for (std::size_t r = 0; r < m.rows; ++r)
            out[r] = dot(x.data() + r * d, weights_, d) + bias_ > 0.0 ? Label::anomalous : Label::normal;
        return out;
    }

    void save(std::ostream& out) const override {
        write_doubles(out, "mean", scaler_.mean);
        write_doubles(out, "scale", scaler_.scale);
        write_doubles(out, "weights", weights_);
        out << "bias " << text::format_double(bias_) << '\n';
    }

    static std::unique_ptr<Model> load(ModelKind kind, std::vector<std::string> columns, Fields& f) {
        Scaler s;
        s.mean = f.doubles("mean");
        s.scale = f.doubles("scale");
        auto w = f.doubles("weights");
        double b = f.one_double("bias");
        if (s.mean.size() != columns.size() || s.scale.size() != columns.size() || w.size() != columns.size())
            throw DataError("linear model artifact has inconsistent widths");
        return std::make_unique<LinearModel>(kind, std::move(columns), std::move(s), std::move(w), b);
    }

private:
    ModelKind kind_;
    Scaler scaler_;
    std::vector<double> weights_;
    double bias_;
};

std::unique_ptr<Model> train_logistic(const ModelSpec& spec, const FeatureMatrix& m) {
    require_both_classes(m, spec);
    const auto& hp = spec.params;
    auto scaler = Scaler::fit(m);
    auto x = scaler.transform(m);
    const std::size_t n = m.rows;
    const std::size_t d = m.cols();
    std::vector<double> w(d, 0.0);
    std::vector<double> grad(d);
    double b = 0.0;
    for (std::size_t epoch = 0; epoch < hp.lr_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = x.data() + r * d;
            double err = sigmoid(dot(row, w, d) + b) - (m.labels[r] == Label::anomalous ? 1.0 : 0.0);
            for (std::size_t c = 0; c < d; ++c) grad[c] += err * row[c];
            grad_b += err;
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t c = 0; c < d; ++c) w[c] -= hp.lr_learning_rate * (grad[c] * inv_n + hp.lr_l2 * w[c]);
        b -= hp.lr_learning_rate * grad_b * inv_n;
    }
    return std::make_unique<LinearModel>(ModelKind::logistic_regression, m.column_ids, std::move(scaler),
                                         std::move(w), b);
}

/// Pegasos with the bias folded in as a constant feature.
std::unique_ptr<Model> train_svm(const ModelSpec& spec, const FeatureMatrix& m, std::uint64_t seed) {
    require_both_classes(m, spec);
    const auto& hp = spec.params;
    if (!(hp.svm_lambda > 0.0)) throw UsageError("svm lambda must be positive");
    auto scaler = Scaler::fit(m);
    auto x = scaler.transform(m);
    const std::size_t n = m.rows;
    const std::size_t d = m.cols();
    std::vector<double> w(d + 1, 0.0);  // w[d] is the bias weight
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    const double radius = 1.0 / std::sqrt(hp.svm_lambda);
    std::uint64_t t = 0;
    for (std::size_t epoch = 0; epoch < hp.svm_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t r : order) {
            ++t;
            const double eta = 1.0 / (hp.svm_lambda * static_cast<double>(t));
            const double* row = x.data() + r * d;
            const double y = m.labels[r] == Label::anomalous ? 1.0 : -1.0;
            const double margin = y * (dot(row, w, d) + w[d]);
            const double shrink = 1.0 - eta * hp.svm_lambda;
            for (auto& v : w) v *= shrink;
            if (margin < 1.0) {
                for (std::size_t c = 0; c < d; ++c) w[c] += eta * y * row[c];
                w[d] += eta * y;
            }
            double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
            if (norm > radius) {
                for (auto& v : w) v *= radius / norm;
            }
        }
    }
    double bias = w[d];
    w.pop_back();
    return std::make_unique<LinearModel>(ModelKind::linear_svm, m.column_ids, std::move(scaler), std::move(w), bias);
}

// ---------------------------------------------------------------------------

/// CART with Gini impurity. Splits are `x[feature] <= threshold` to the left; among equal
/// gains the lowest feature index and then the lowest threshold wins.
class DecisionTree : public Model {
public:
    struct Node {
        std::int64_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int64_t left = -1;
        std::int64_t right = -1;
        Label label = Label::normal;
    };

    DecisionTree(std::vector<std::string> columns, std::vector<Node> nodes) : nodes_(std::move(nodes)) {
        column_ids_ = std::move(columns);
    }

    ModelKind kind() const override { return ModelKind::decision_tree; }

    std::vector<Label> predict(const FeatureMatrix& m) const override {
        std::vector<Label> out(m.rows);
        for (std::size_t r = 0; r < m.rows; ++r) {
            auto row = m.row(r);
            std::size_t node = 0;
            while (nodes_[node].feature >= 0) {
                const auto& nd = nodes_[node];
                node = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                                         : nd.right);
            }
            out[r] = nodes_[node].label;
        }
        return out;
    }

    void save(std::ostream& out) const override {
        out << "nodes " << nodes_.size() << '\n';
        for (const auto& n : nodes_)
            out << "node " << n.feature << ' ' << text::format_double(n.threshold) << ' ' << n.left << ' ' << n.right
                << ' ' << to_string(n.label) << '\n';
    }

    static std::unique_ptr<Model> load(std::vector<std::string> columns, Fields& f) {
        auto count = f.one_uint("nodes");
        std::vector<Node> nodes(count);
        for (auto& n : nodes) {
            auto v = f.expect("node");
            if (v.size() != 5) throw DataError("tree node needs 5 fields");
            n.feature = std::stoll(std::string(v[0]));
            n.threshold = text::parse_double(v[1]);
            n.left = std::stoll(std::string(v[2]));
            n.right = std::stoll(std::string(v[3]));
            n.label = parse_label(v[4]);
        }
        validate(nodes, columns.size());
        return std::make_unique<DecisionTree>(std::move(columns), std::move(nodes));
    }

    static void validate(const std::vector<Node>& nodes, std::size_t width) {
        if (nodes.empty()) throw DataError("tree has no nodes");
        const auto n = static_cast<std::int64_t>(nodes.size());
        for (std::int64_t i = 0; i < n; ++i) {
            const auto& nd = nodes[static_cast<std::size_t>(i)];
            if (nd.feature < 0) continue;
            if (nd.feature >= static_cast<std::int64_t>(width) || nd.left <= i || nd.right <= i || nd.left >= n ||
                nd.right >= n)
                throw DataError("tree node " + std::to_string(i) + " is malformed");
        }
    }

private:
    std::vector<Node> nodes_;
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& m, const Hyperparameters& hp) : m_(m), hp_(hp) {}

    std::vector<DecisionTree::Node> build() {
        std::vector<std::size_t> all(m_.rows);
        std::iota(all.begin(), all.end(), std::size_t{0});
        grow(all, 0);
        return std::move(nodes_);
    }

private:
    static double gini(double anomalous, double total) {
        if (total <= 0.0) return 0.0;
        double p = anomalous / total;
        return 2.0 * p * (1.0 - p);
    }

    std::size_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        std::size_t anomalous = 0;
        for (auto r : idx)
            if (m_.labels[r] == Label::anomalous) ++anomalous;
        const std::size_t n = idx.size();
        nodes_[id].label = 2 * anomalous > n ? Label::anomalous : Label::normal;
        if (depth >= hp_.tree_max_depth || n < hp_.tree_min_samples_split || anomalous == 0 || anomalous == n)
            return id;

        const double total = static_cast<double>(n);
        const double parent = gini(static_cast<double>(anomalous), total);
        double best_gain = 1e-12;
        std::int64_t best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> sorted(idx);
        for (std::size_t c = 0; c < m_.cols(); ++c) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                double va = m_.at(a, c);
                double vb = m_.at(b, c);
                return va < vb || (va == vb && a < b);
            });
            std::size_t left_anom = 0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                if (m_.labels[sorted[k]] == Label::anomalous) ++left_anom;
                double here = m_.at(sorted[k], c);
                double next = m_.at(sorted[k + 1], c);
                if (!(here < next)) continue;
                const double nl = static_cast<double>(k + 1);
                const double nr = total - nl;
                const double weighted = (nl * gini(static_cast<double>(left_anom), nl) +
                                         nr * gini(static_cast<double>(anomalous - left_anom), nr)) /
                                        total;
                const double gain = parent - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = static_cast<std::int64_t>(c);
                    best_threshold = here + (next - here) / 2.0;
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : idx)
            (m_.at(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(r);
        idx.clear();
        idx.shrink_to_fit();
        nodes_[id].feature = best_feature;
        nodes_[id].threshold = best_threshold;
        auto l = grow(left, depth + 1);
        auto r = grow(right, depth + 1);
        nodes_[id].left = static_cast<std::int64_t>(l);
        nodes_[id].right = static_cast<std::int64_t>(r);
        return id;
    }

    const FeatureMatrix& m_;
    const Hyperparameters& hp_;
    std::vector<DecisionTree::Node> nodes_;
};

// ---------------------------------------------------------------------------

/// Average path length of an unsuccessful BST search over n points.
double average_path_length(double n) {
    if (n <= 1.0) return 0.0;
    if (n <= 2.0) return 1.0;
    constexpr double euler_gamma = 0.5772156649015329;
    return 2.0 * (std::log(n - 1.0) + euler_gamma) - 2.0 * (n - 1.0) / n;
}

class IsolationForest : public Model {
public:
    struct Node {
        std::int64_t feature = -1;  // -1 marks a leaf
        double split = 0.0;         // x < split goes left
        std::int64_t left = -1;
        std::int64_t right = -1;
        std::uint64_t size = 0;
    };
    using Tree = std::vector<Node>;

    IsolationForest(std::vector<std::string> columns, std::vector<Tree> trees, std::size_t subsample,
                    double threshold)
        : trees_(std::move(trees)), subsample_(subsample), threshold_(threshold) {
        column_ids_ = std::move(columns);
    }

    ModelKind kind() const override { return ModelKind::isolation_forest; }

    double score(std::span<const double> row) const {
        const double norm = average_path_length(static_cast<double>(subsample_));
        if (norm <= 0.0 || trees_.empty()) return 0.0;
        double total = 0.0;
        for (const auto& tree : trees_) {
            std::size_t node = 0;
            double depth = 0.0;
            while (tree[node].feature >= 0) {
                const auto& nd = tree[node];
                node = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left
                                                                                                     : nd.right);
                depth += 1.0;
            }
            total += depth + average_path_length(static_cast<double>(tree[node].size));
        }
        return std::pow(2.0, -(total / static_cast<double>(trees_.size())) / norm);
    }

    std::vector<Label> predict(const FeatureMatrix& m) const override {
        std::vector<Label> out(m.rows);
        for (std::size_t r = 0; r < m.rows; ++r) out[r] = score(m.row(r)) >= threshold_ ? Label::anomalous : Label::normal;
        return out;
    }

    void save(std::ostream& out) const override {
        out << "subsample " << subsample_ << '\n';
        out << "threshold " << text::format_double(threshold_) << '\n';
        out << "trees " << trees_.size() << '\n';
        for (const auto& tree : trees_) {
            out << "tree " << tree.size() << '\n';
            for (const auto& n : tree)
                out << "node " << n.feature << ' ' << text::format_double(n.split) << ' ' << n.left << ' ' << n.right
                    << ' ' << n.size << '\n';
        }
    }

    static std::unique_ptr<Model> load(std::vector<std::string> columns, Fields& f) {
        auto subsample = f.one_uint("subsample");
        auto threshold = f.one_double("threshold");
        auto count = f.one_uint("trees");
        std::vector<Tree> trees(count);
        for (auto& tree : trees) {
            tree.resize(f.one_uint("tree"));
            if (tree.empty()) throw DataError("isolation tree has no nodes");
            for (auto& n : tree) {
                auto v = f.expect("node");
                if (v.size() != 5) throw DataError("isolation node needs 5 fields");
                n.feature = std::stoll(std::string(v[0]));
                n.split = text::parse_double(v[1]);
                n.left = std::stoll(std::string(v[2]));
                n.right = std::stoll(std::string(v[3]));
                n.size = text::parse_uint(v[4]);
            }
            const auto size = static_cast<std::int64_t>(tree.size());
            for (std::int64_t i = 0; i < size; ++i) {
                const auto& nd = tree[static_cast<std::size_t>(i)];
                if (nd.feature >= 0 && (nd.feature >= static_cast<std::int64_t>(columns.size()) || nd.left <= i ||
                                        nd.right <= i || nd.left >= size || nd.right >= size))
                    throw DataError("isolation tree node " + std::to_string(i) + " is malformed");
            }
        }
        return std::make_unique<IsolationForest>(std::move(columns), std::move(trees), subsample, threshold);
    }

private:
    std::vector<Tree> trees_;
    std::size_t subsample_;
    double threshold_;
};

class IsolationTreeBuilder {
public:
    IsolationTreeBuilder(const FeatureMatrix& m, Rng& rng, std::size_t height_limit)
        : m_(m), rng_(rng), limit_(height_limit) {}

    IsolationForest::Tree build(std::vector<std::size_t> sample) {
        tree_.clear();
        grow(sample, 0);
        return std::move(tree_);
    }

private:
    std::size_t grow(const std::vector<std::size_t>& idx, std::size_t height) {
        const std::size_t id = tree_.size();
        tree_.emplace_back();
        tree_[id].size = idx.size();
        if (idx.size() <= 1 || height >= limit_) return id;

        std::vector<std::size_t> candidates;
        std::vector<double> lo(m_.cols());
        std::vector<double> hi(m_.cols());
        for (std::size_t c = 0; c < m_.cols(); ++c) {
            lo[c] = hi[c] = m_.at(idx.front(), c);
            for (auto r : idx) {
                lo[c] = std::min(lo[c], m_.at(r, c));
                hi[c] = std::max(hi[c], m_.at(r, c));
            }
            if (lo[c] < hi[c]) candidates.push_back(c);
        }
        if (candidates.empty()) return id;
        const std::size_t feature = candidates[rng_.index(candidates.size())];
        double split = lo[feature] + rng_.uniform() * (hi[feature] - lo[feature]);
        if (!(split > lo[feature])) split = lo[feature] + (hi[feature] - lo[feature]) / 2.0;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : idx) (m_.at(r, feature) < split ? left : right).push_back(r);
        tree_[id].feature = static_cast<std::int64_t>(feature);
        tree_[id].split = split;
        auto l = grow(left, height + 1);
        auto r = grow(right, height + 1);
        tree_[id].left = static_cast<std::int64_t>(l);
        tree_[id].right = static_cast<std::int64_t>(r);
        return id;
    }

    const FeatureMatrix& m_;
    Rng& rng_;
    std::size_t limit_;
    IsolationForest::Tree tree_;
};

std::unique_ptr<Model> train_forest(const ModelSpec& spec, const FeatureMatrix& m, std::uint64_t seed) {
    const auto& hp = spec.params;
    if (m.rows == 0) throw DataError("isolation forest needs a non-empty training slice");
    if (hp.forest_trees == 0 || hp.forest_subsample == 0) throw UsageError("isolation forest needs trees and samples");
    const std::size_t psi = std::min(hp.forest_subsample, m.rows);
    const auto limit = static_cast<std::size_t>(std::ceil(std::log2(std::max<double>(2.0, static_cast<double>(psi)))));
    Rng rng(seed);
    std::vector<IsolationForest::Tree> trees;
    trees.reserve(hp.forest_trees);
    std::vector<std::size_t> pool(m.rows);
    for (std::size_t t = 0; t < hp.forest_trees; ++t) {
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < psi; ++i) std::swap(pool[i], pool[i + rng.index(m.rows - i)]);
        std::vector<std::size_t> sample(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(psi));
        IsolationTreeBuilder builder(m, rng, limit);
        trees.push_back(builder.build(std::move(sample)));
    }
    return std::make_unique<IsolationForest>(m.column_ids, std::move(trees), psi, hp.forest_threshold);
}

// ---------------------------------------------------------------------------

/// Flags a group anomalous iff it contains at least one occurrence of a single event.
class SingleEventRule : public Model {
public:
    SingleEventRule(std::vector<std::string> columns, std::string event_id, std::size_t column)
        : event_id_(std::move(event_id)), column_(column) {
        column_ids_ = std::move(columns);
    }

    ModelKind kind() const override { return ModelKind::single_event; }

    std::vector<Label> predict(const FeatureMatrix& m) const override {
        std::vector<Label> out(m.rows);
        for (std::size_t r = 0; r < m.rows; ++r) out[r] = m.at(r, column_) > 0.0 ? Label::anomalous : Label::normal;
        return out;
    }

    void save(std::ostream& out) const override { out << "event " << event_id_ << '\n'; }

    static std::unique_ptr<Model> load(std::vector<std::string> columns, Fields& f) {
        auto v = f.expect("event");
        if (v.size() != 1) throw DataError("single-event model needs one event id");
        auto id = std::string(v.front());
        auto it = std::find(columns.begin(), columns.end(), id);
        if (it == columns.end()) throw DataError("single-event model event " + id + " is not a column");
        auto column = static_cast<std::size_t>(it - columns.begin());
        return std::make_unique<SingleEventRule>(std::move(columns), std::move(id), column);
    }

private:
    std::string event_id_;
    std::size_t column_;
};

/// Delegates prediction to a command: a groups file of the rows on stdin, one label per line on stdout.
class ExternalModel : public Model {
public:
    ExternalModel(std::vector<std::string> columns, std::string command) : command_(std::move(command)) {
        column_ids_ = std::move(columns);
    }

    ModelKind kind() const override { return ModelKind::external; }

    std::vector<Label> predict(const FeatureMatrix& m) const override {
        char path[] = "/tmp/logcleaner-external-XXXXXX";
        int fd = ::mkstemp(path);
        if (fd < 0) throw DataError("cannot create a temporary file for the external detector");
        ::close(fd);
        struct Cleanup {
            const char* p;
            ~Cleanup() { std::remove(p); }
        } cleanup{path};
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            out << artifact_header("groups") << '\n';
            for (std::size_t r = 0; r < m.rows; ++r) {
                out << r << "\tunknown\t";
                bool first = true;
                for (std::size_t c = 0; c < m.cols(); ++c) {
                    for (auto k = static_cast<long long>(m.at(r, c)); k > 0; --k) {
                        if (!first) out << ' ';
                        first = false;
                        out << m.column_ids[c];
                    }
                }
                out << '\n';
            }
        }
        std::string command = "(" + command_ + ") < '" + std::string(path) + "'";
        FILE* pipe = ::popen(command.c_str(), "r");
        if (!pipe) throw DataError("cannot start external detector: " + command_);
        std::string output;
        char buf[4096];
        while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) output.append(buf, got);
        int status = ::pclose(pipe);
        if (status != 0) throw DataError("external detector exited with status " + std::to_string(status));
        std::vector<Label> labels;
        std::istringstream lines(output);
        std::string line;
        while (std::getline(lines, line)) {
            auto v = text::trim(line);
            if (v.empty()) continue;
            if (v == "1" || v == "anomalous") labels.push_back(Label::anomalous);
            else if (v == "0" || v == "normal") labels.push_back(Label::normal);
            else throw DataError("external detector printed an unknown label '" + std::string(v) + "'");
        }
        if (labels.size() != m.rows)
            throw DataError("external detector returned " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(m.rows) + " groups");
        return labels;
    }

    void save(std::ostream& out) const override { out << "command " << command_ << '\n'; }

private:
    std::string command_;
};

}  // namespace

std::unique_ptr<Model> train(const ModelSpec& spec, const FeatureMatrix& train_slice, std::uint64_t seed) {
    if (train_slice.rows == 0) throw DataError(spec.name() + " training slice is empty");
    switch (spec.kind) {
        case ModelKind::logistic_regression:
            return train_logistic(spec, train_slice);
        case ModelKind::linear_svm:
            return train_svm(spec, train_slice, seed);
        case ModelKind::decision_tree: {
            require_both_classes(train_slice, spec);
            TreeBuilder builder(train_slice, spec.params);
            return std::make_unique<DecisionTree>(train_slice.column_ids, builder.build());
        }
        case ModelKind::isolation_forest:
            return train_forest(spec, train_slice, seed);
        case ModelKind::single_event: {
            auto column = train_slice.column_of(spec.event_id);
            if (column == static_cast<std::size_t>(-1))
                throw DataError("single-event model: " + spec.event_id + " is not among the feature columns");
            return std::make_unique<SingleEventRule>(train_slice.column_ids, spec.event_id, column);
        }
        case ModelKind::external:
            return std::make_unique<ExternalModel>(train_slice.column_ids, spec.command);
    }
    throw UsageError("unsupported model kind");
}

void save_model(const std::filesystem::path& path, const Model& model) {
    auto out = open_output(path);
    write_model(out, model);
}

void write_model(std::ostream& out, const Model& model) {
    out << artifact_header("model") << '\n';
    out << "kind " << to_string(model.kind()) << '\n';
    out << "columns";
    for (const auto& c : model.column_ids()) out << ' ' << c;
    out << '\n';
    model.save(out);
}

std::unique_ptr<Model> read_model(std::istream& in) {
    expect_artifact_header(in, "model");
    Fields f(in);
    auto kind_fields = f.expect("kind");
    if (kind_fields.size() != 1) throw DataError("model artifact: bad kind line");
    auto kind = std::string(kind_fields.front());
    std::vector<std::string> columns;
    for (auto c : f.expect("columns")) columns.emplace_back(c);
    if (kind == "lr") return LinearModel::load(ModelKind::logistic_regression, std::move(columns), f);
    if (kind == "svm") return LinearModel::load(ModelKind::linear_svm, std::move(columns), f);
    if (kind == "dt") return DecisionTree::load(std::move(columns), f);
    if (kind == "iforest") return IsolationForest::load(std::move(columns), f);
    if (kind == "single") return SingleEventRule::load(std::move(columns), f);
    if (kind == "external") return std::make_unique<ExternalModel>(std::move(columns), f.rest("command"));
    throw DataError("unknown model kind '" + kind + "'");
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_model(in);
}

}  // namespace logcleaner
