#include "logcleaner/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

double mutual_information(const Contingency& table, bool miller_madow) {
    const double n = static_cast<double>(table.total());
    if (n == 0.0) return 0.0;
    double row[2] = {0, 0};
    double col[2] = {0, 0};
    for (int e = 0; e < 2; ++e)
        for (int l = 0; l < 2; ++l) {
            row[e] += static_cast<double>(table.cells[e][l]);
            col[l] += static_cast<double>(table.cells[e][l]);
        }
    double mi = 0.0;
    int joint_support = 0;
    for (int e = 0; e < 2; ++e)
        for (int l = 0; l < 2; ++l) {
            const double c = static_cast<double>(table.cells[e][l]);
            if (c == 0.0) continue;
            ++joint_support;
            mi += (c / n) * std::log(c * n / (row[e] * col[l]));
        }
    if (miller_madow) {
        const int row_support = (row[0] > 0) + (row[1] > 0);
        const int col_support = (col[0] > 0) + (col[1] > 0);
        mi += static_cast<double>((row_support - 1) + (col_support - 1) - (joint_support - 1)) / (2.0 * n);
    }
    return mi;
}

Contingency contingency(const LabeledDataset& dataset, EventIndex event) {
    Contingency t;
    for (std::size_t g = 0; g < dataset.group_count(); ++g) {
        bool present = false;
        dataset.for_each_event(g, [&](EventIndex e) { present = present || e == event; });
        ++t.cells[present][dataset.label(g) == Label::anomalous];
    }
    return t;
}

MIScore mutual_information(const LabeledDataset& dataset, EventIndex event, bool miller_madow) {
    MIScore s;
    s.event = event;
    s.event_id = dataset.event_id(event);
    s.counts = contingency(dataset, event);
    s.mi = mutual_information(s.counts, miller_madow);
    return s;
}

TfidfStage tfidf_filter(const LabeledDataset& dataset, std::span<const EventIndex> candidates, double cutoff,
                        std::span<const EventIndex> whitelist) {
    if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw UsageError("tf-idf cutoff must be in [0, 1]");
    const std::size_t events = dataset.event_count();
    const double groups = static_cast<double>(dataset.group_count());
    TfidfStage out;
    out.document_frequency.assign(events, 0.0);
    out.weight.assign(events, 0.0);
    std::vector<std::uint64_t> containing(events, 0);
    std::vector<std::uint64_t> count(events, 0);
    std::vector<std::size_t> seen(events, static_cast<std::size_t>(-1));
    std::uint64_t total = 0;
    for (std::size_t g = 0; g < dataset.group_count(); ++g) {
        dataset.for_each_event(g, [&](EventIndex e) {
            ++count[e];
            ++total;
            if (seen[e] != g) {
                seen[e] = g;
                ++containing[e];
            }
        });
    }
    for (std::size_t e = 0; e < events; ++e) {
        if (groups > 0) out.document_frequency[e] = static_cast<double>(containing[e]) / groups;
        const double tf = total == 0 ? 0.0 : static_cast<double>(count[e]) / static_cast<double>(total);
        const double idf = std::log((1.0 + groups) / (1.0 + static_cast<double>(containing[e]))) + 1.0;
        out.weight[e] = tf * idf;
    }
    for (EventIndex e : candidates) {
        bool listed = std::find(whitelist.begin(), whitelist.end(), e) != whitelist.end();
        (out.document_frequency[e] < cutoff && !listed ? out.sporadic : out.kept).push_back(e);
    }
    return out;
}

AntiStage anti_event_filter(const LabeledDataset& dataset, std::span<const EventIndex> candidates,
                            double theta_anti, bool miller_madow) {
    AntiStage out;
    for (EventIndex e : candidates) {
        out.scores.push_back(mutual_information(dataset, e, miller_madow));
        (out.scores.back().mi <= theta_anti + 1e-12 ? out.anti : out.relevant).push_back(e);
    }
    return out;
}

AppearGraph::AppearGraph(std::vector<EventIndex> nodes)
    : nodes_(std::move(nodes)), weights_(nodes_.size() * nodes_.size(), 0) {}

AppearGraph AppearGraph::build(const LabeledDataset& dataset, std::span<const EventIndex> events) {
    return build(dataset, events, 0, dataset.group_count());
}

AppearGraph AppearGraph::build(const LabeledDataset& dataset, std::span<const EventIndex> events, std::size_t begin,
                               std::size_t end) {
    AppearGraph graph({events.begin(), events.end()});
    const std::size_t n = graph.size();
    std::vector<std::size_t> position(dataset.event_count(), n);
    for (std::size_t i = 0; i < n; ++i) position[events[i]] = i;
    std::vector<std::size_t> seen(n, static_cast<std::size_t>(-1));
    std::vector<std::size_t> present;
    for (std::size_t g = begin; g < end; ++g) {
        present.clear();
        dataset.for_each_event(g, [&](EventIndex e) {
            auto p = position[e];
            if (p < n && seen[p] != g) {
                seen[p] = g;
                present.push_back(p);
            }
        });
        for (std::size_t a = 0; a < present.size(); ++a) {
            ++graph.weights_[present[a] * n + present[a]];
            for (std::size_t b = a + 1; b < present.size(); ++b) {
                ++graph.weights_[present[a] * n + present[b]];
                ++graph.weights_[present[b] * n + present[a]];
            }
        }
    }
    return graph;
}

void AppearGraph::merge(const AppearGraph& other) {
    if (other.nodes_ != nodes_) throw Error("appear graphs over different events cannot be merged");
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += other.weights_[i];
}

std::vector<std::vector<double>> AppearGraph::normalized_rows() const {
    const std::size_t n = size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double diag = static_cast<double>(weight(i, i));
        if (diag == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) rows[i][j] = static_cast<double>(weight(i, j)) / diag;
    }
    return rows;
}

DuplicativeStage duplicative_separator(const AppearGraph& graph, std::span<const MIScore> mi,
                                       std::size_t theta_dup, double xi) {
    if (theta_dup < 2) throw UsageError("theta_dup must be at least 2");
    if (mi.size() != graph.size()) throw Error("MI scores do not align with the appear graph");
    DuplicativeStage out;
    if (graph.size() == 0) return out;
    auto rows = graph.normalized_rows();
    out.optics = optics(cosine_distances(rows), theta_dup);
    auto clusters = xi_clusters(out.optics, theta_dup, xi, theta_dup);
    out.labels = xi_labels(out.optics, clusters);

    const auto& nodes = graph.nodes();
    const int cluster_count = out.labels.empty() ? 0 : *std::max_element(out.labels.begin(), out.labels.end()) + 1;
    std::vector<std::size_t> representative(static_cast<std::size_t>(cluster_count), graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const int label = out.labels[i];
        if (label < 0) continue;
        auto& best = representative[static_cast<std::size_t>(label)];
        if (best == graph.size() || mi[i].mi > mi[best].mi || (mi[i].mi == mi[best].mi && nodes[i] < nodes[best]))
            best = i;
    }
    for (std::size_t i = 0; i < graph.size(); ++i) {
        const int label = out.labels[i];
        if (label < 0) {
            out.outliers.push_back(nodes[i]);
            out.retained.push_back(nodes[i]);
        } else if (representative[static_cast<std::size_t>(label)] == i) {
            out.retained.push_back(nodes[i]);
        } else {
            out.removed.emplace_back(nodes[i], nodes[representative[static_cast<std::size_t>(label)]]);
        }
    }
    return out;
}

void ProfileConfig::validate() const {
    if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw UsageError("cutoff must be in [0, 1]");
    if (!std::isfinite(theta_anti)) throw UsageError("theta_anti must be finite");
    if (theta_dup < 2) throw UsageError("theta_dup must be at least 2");
    if (!(xi > 0.0 && xi < 1.0)) throw UsageError("xi must be in (0, 1)");
}

std::string_view to_string(RemovalReason reason) {
    switch (reason) {
        case RemovalReason::sporadic: return "sporadic";
        case RemovalReason::anti: return "anti";
        case RemovalReason::duplicative: return "dup";
    }
    return "sporadic";
}

ReducedEventSet::ReducedEventSet(std::vector<EventDisposition> events, std::vector<std::string> outliers,
                                 ProfileConfig config)
    : events_(std::move(events)), outliers_(std::move(outliers)), config_(std::move(config)) {
    check();
}

void ReducedEventSet::check() const {
    for (const auto& e : events_) {
        if (e.event_id.empty() || e.event_id.find_first_of(" \t") != std::string::npos)
            throw DataError("reduced event set: bad event id '" + e.event_id + "'");
        if (e.removed == RemovalReason::duplicative) {
            const auto* rep = find(e.representative);
            if (!rep || !rep->retained())
                throw DataError("reduced event set: " + e.event_id + " names a representative that is not retained");
        } else if (!e.representative.empty()) {
            throw DataError("reduced event set: only duplicative removals carry a representative");
        }
    }
    for (std::size_t i = 0; i < events_.size(); ++i)
        for (std::size_t j = i + 1; j < events_.size(); ++j)
            if (events_[i].event_id == events_[j].event_id)
                throw DataError("reduced event set: duplicate event " + events_[i].event_id);
    for (const auto& o : outliers_) {
        const auto* e = find(o);
        if (!e || !e->retained()) throw DataError("reduced event set: outlier " + o + " is not retained");
    }
}

const EventDisposition* ReducedEventSet::find(std::string_view event_id) const {
    for (const auto& e : events_)
        if (e.event_id == event_id) return &e;
    return nullptr;
}

std::vector<std::string> ReducedEventSet::retained() const {
    std::vector<std::string> out;
    for (const auto& e : events_)
        if (e.retained()) out.push_back(e.event_id);
    return out;
}

std::size_t ReducedEventSet::removed_count(std::optional<RemovalReason> reason) const {
    return static_cast<std::size_t>(std::count_if(events_.begin(), events_.end(), [&](const EventDisposition& e) {
        return e.removed && (!reason || e.removed == reason);
    }));
}

void ReducedEventSet::write_body(std::ostream& out) const {
    out << artifact_header("reduced") << '\n';
    const auto& c = config_;
    out << "#param cutoff=" << text::format_double(c.cutoff) << " theta_anti=" << text::format_double(c.theta_anti)
        << " theta_dup=" << c.theta_dup << " xi=" << text::format_double(c.xi) << " tfidf=" << c.tfidf
        << " anti=" << c.anti << " dup=" << c.duplicative << " miller_madow=" << c.miller_madow << " whitelist=";
    for (std::size_t i = 0; i < c.whitelist.size(); ++i) out << (i ? "," : "") << c.whitelist[i];
    out << '\n';
    out << "#outliers";
    for (const auto& o : outliers_) out << ' ' << o;
    out << '\n';
    for (const auto& e : events_) {
        out << e.event_id << '\t';
        if (!e.removed) out << "retained";
        else if (*e.removed == RemovalReason::duplicative) out << "dup:" << e.representative;
        else out << to_string(*e.removed);
        out << '\t' << e.template_text << '\n';
    }
}

std::string ReducedEventSet::content_hash() const {
    std::ostringstream body;
    write_body(body);
    return text::to_hex(text::fnv1a(body.str()));
}

void ReducedEventSet::write(std::ostream& out) const {
    std::ostringstream body;
    write_body(body);
    const auto s = body.str();
    out << s << "#hash " << text::to_hex(text::fnv1a(s)) << '\n';
}

namespace {

bool parse_flag(std::string_view v) {
    if (v == "1") return true;
    if (v == "0") return false;
    throw DataError("reduced event set: expected 0 or 1, got '" + std::string(v) + "'");
}

ProfileConfig parse_params(std::string_view line) {
    ProfileConfig c;
    auto fields = text::split_whitespace(line);
    for (std::size_t i = 1; i < fields.size(); ++i) {
        auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) throw DataError("reduced event set: bad #param field");
        auto key = fields[i].substr(0, eq);
        auto value = fields[i].substr(eq + 1);
        if (key == "cutoff") c.cutoff = text::parse_double(value);
        else if (key == "theta_anti") c.theta_anti = text::parse_double(value);
        else if (key == "theta_dup") c.theta_dup = text::parse_uint(value);
        else if (key == "xi") c.xi = text::parse_double(value);
        else if (key == "tfidf") c.tfidf = parse_flag(value);
        else if (key == "anti") c.anti = parse_flag(value);
        else if (key == "dup") c.duplicative = parse_flag(value);
        else if (key == "miller_madow") c.miller_madow = parse_flag(value);
        else if (key == "whitelist") {
            if (!value.empty())
                for (auto id : text::split(value, ',')) c.whitelist.emplace_back(id);
        } else throw DataError("reduced event set: unknown parameter '" + std::string(key) + "'");
    }
    return c;
}

}  // namespace

ReducedEventSet ReducedEventSet::read(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw DataError("reduced event set is empty");
    auto parsed = parse_artifact_header(header);
    if (!parsed || parsed->kind != "reduced") throw DataError("not a reduced event set: '" + header + "'");
    if (parsed->version != kArtifactVersion)
        throw DataError("reduced event set version " + parsed->version + " is not supported");

    std::string body = header + '\n';
    std::optional<std::string> trailer;
    ProfileConfig config;
    std::vector<std::string> outliers;
    std::vector<EventDisposition> events;
    std::string line;
    while (std::getline(in, line)) {
        if (trailer) {
            if (!text::trim(line).empty()) throw DataError("reduced event set has content after its hash trailer");
            continue;
        }
        if (text::starts_with(line, "#hash ")) {
            trailer = std::string(text::trim(line.substr(6)));
            continue;
        }
        body += line;
        body += '\n';
        if (text::starts_with(line, "#param")) {
            config = parse_params(line);
        } else if (text::starts_with(line, "#outliers")) {
            for (auto id : text::split_whitespace(line.substr(9))) outliers.emplace_back(id);
        } else if (line.empty() || line.front() == '#') {
            continue;
        } else {
            auto f = text::split(line, '\t');
            if (f.size() != 3) throw DataError("reduced event set: expected 3 tab-separated fields");
            EventDisposition d{std::string(f[0]), std::string(f[2]), std::nullopt, {}};
            if (f[1] == "sporadic") d.removed = RemovalReason::sporadic;
            else if (f[1] == "anti") d.removed = RemovalReason::anti;
            else if (text::starts_with(f[1], "dup:")) {
                d.removed = RemovalReason::duplicative;
                d.representative = std::string(f[1].substr(4));
            } else if (f[1] != "retained")
                throw DataError("reduced event set: unknown disposition '" + std::string(f[1]) + "'");
            events.push_back(std::move(d));
        }
    }
    if (!trailer) throw DataError("reduced event set has no hash trailer");
    const auto actual = text::to_hex(text::fnv1a(body));
    if (*trailer != actual) throw DataError("reduced event set hash mismatch: file says " + *trailer + ", content is " + actual);
    ReducedEventSet set(std::move(events), std::move(outliers), std::move(config));
    return set;
}

void ReducedEventSet::save(const std::filesystem::path& path) const {
    auto out = open_output(path);
    write(out);
}

ReducedEventSet ReducedEventSet::load(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read(in);
}

double ProfileResult::events_reduction(std::size_t stage) const {
    const auto total = retained_after[0];
    return total == 0 ? 0.0 : static_cast<double>(total - retained_after.at(stage)) / static_cast<double>(total);
}

double ProfileResult::lines_reduction() const {
    return lines_total == 0 ? 0.0 : static_cast<double>(lines_removed) / static_cast<double>(lines_total);
}

ProfileResult profile(const LabeledDataset& dataset, const ProfileConfig& config) {
    config.validate();
    ProfileResult out;
    const auto& templates = dataset.templates();
    std::vector<EventIndex> all(templates.size());
    for (EventIndex e = 0; e < all.size(); ++e) all[e] = e;

    std::vector<EventIndex> whitelist;
    for (const auto& id : config.whitelist) whitelist.push_back(templates.require(id));

    std::vector<EventDisposition> dispositions;
    for (const auto& t : templates.templates()) dispositions.push_back({t.event_id, t.text(), std::nullopt, {}});

    out.tfidf = tfidf_filter(dataset, all, config.tfidf ? config.cutoff : 0.0, whitelist);
    for (auto e : out.tfidf.sporadic) dispositions[e].removed = RemovalReason::sporadic;
    auto candidates = out.tfidf.kept;

    out.anti = anti_event_filter(dataset, candidates, config.theta_anti, config.miller_madow);
    if (config.anti) {
        for (auto e : out.anti.anti) dispositions[e].removed = RemovalReason::anti;
        candidates = out.anti.relevant;
    }
    std::vector<MIScore> scores;
    for (const auto& s : out.anti.scores)
        if (std::find(candidates.begin(), candidates.end(), s.event) != candidates.end()) scores.push_back(s);

    std::vector<std::string> outliers;
    if (config.duplicative && !candidates.empty()) {
        auto graph = AppearGraph::build(dataset, candidates);
        out.duplicative = duplicative_separator(graph, scores, config.theta_dup, config.xi);
        for (const auto& [e, rep] : out.duplicative.removed) {
            dispositions[e].removed = RemovalReason::duplicative;
            dispositions[e].representative = templates[rep].event_id;
        }
        for (auto e : out.duplicative.outliers) outliers.push_back(templates[e].event_id);
    }

    out.retained_after = {all.size(), out.tfidf.kept.size(), all.size(), all.size()};
    out.retained_after[2] = candidates.size();
    out.retained_after[3] = candidates.size() - out.duplicative.removed.size();
    for (EventIndex e = 0; e < all.size(); ++e) {
        out.lines_total += dataset.occurrences(e);
        if (dispositions[e].removed) out.lines_removed += dataset.occurrences(e);
    }
    out.reduced = ReducedEventSet(std::move(dispositions), std::move(outliers), config);
    return out;
}

LabeledDataset training_view(const LabeledDataset& dataset) {
    std::vector<EventGroup> groups;
    for (std::size_t g = 0; g < dataset.split_point(); ++g) groups.push_back(dataset.group(g));
    auto view = LabeledDataset(std::move(groups), dataset.template_set(), dataset.split_point());
    std::vector<EventIndex> inactive;
    for (EventIndex e = 0; e < dataset.event_count(); ++e)
        if (!dataset.is_active(e)) inactive.push_back(e);
    return view.remove_events(inactive);
}

}  // namespace logcleaner
