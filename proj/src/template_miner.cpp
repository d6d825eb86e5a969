#include "logcleaner/template_miner.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

namespace {

bool has_digit(std::string_view token) {
    return std::any_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace

void MinerConfig::validate() const {
    if (depth < 3) throw UsageError("miner depth must be at least 3");
    if (!(similarity >= 0.0 && similarity <= 1.0)) throw UsageError("miner similarity must be in [0,1]");
    if (max_children < 2) throw UsageError("miner max_children must be at least 2");
}

std::string EventTemplate::text() const { return join_tokens(tokens); }

std::vector<std::string> tokenize(std::string_view content) {
    auto views = text::split_whitespace(content);
    if (views.empty()) return {std::string()};
    return {views.begin(), views.end()};
}

std::vector<std::string> mask_tokens(std::string_view content) {
    auto tokens = tokenize(content);
    for (auto& token : tokens)
        if (has_digit(token)) token = std::string(kWildcard);
    return tokens;
}

// ---------------------------------------------------------------------------
// TemplateSet

TemplateSet::TemplateSet(std::vector<EventTemplate> templates, MinerConfig config)
    : templates_(std::move(templates)), config_(config) {
    build_index();
}

void TemplateSet::build_index() {
    by_id_.clear();
    by_length_.clear();
    literal_count_.assign(templates_.size(), 0);
    for (EventIndex i = 0; i < templates_.size(); ++i) {
        const auto& t = templates_[i];
        if (t.tokens.empty()) throw DataError("template " + t.event_id + " has no tokens");
        if (!by_id_.emplace(t.event_id, i).second) throw DataError("duplicate event id " + t.event_id);
        literal_count_[i] = static_cast<std::size_t>(
            std::count_if(t.tokens.begin(), t.tokens.end(), [](const auto& tok) { return tok != kWildcard; }));
        by_length_[t.tokens.size()].push_back(i);
    }
    for (auto& [length, candidates] : by_length_) {
        std::stable_sort(candidates.begin(), candidates.end(), [&](EventIndex a, EventIndex b) {
            return literal_count_[a] > literal_count_[b];
        });
    }
}

std::optional<EventIndex> TemplateSet::index_of(std::string_view event_id) const {
    auto it = by_id_.find(std::string(event_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

EventIndex TemplateSet::require(std::string_view event_id) const {
    auto index = index_of(event_id);
    if (!index) throw DataError("unknown event id '" + std::string(event_id) + "'");
    return *index;
}

std::optional<EventIndex> TemplateSet::match(std::string_view content) const {
    auto views = text::split_whitespace(content);
    if (views.empty()) views.emplace_back();
    auto it = by_length_.find(views.size());
    if (it == by_length_.end()) return std::nullopt;
    for (EventIndex candidate : it->second) {
        const auto& tokens = templates_[candidate].tokens;
        bool ok = true;
        for (std::size_t k = 0; ok && k < tokens.size(); ++k)
            ok = tokens[k] == kWildcard || tokens[k] == views[k];
        if (ok) return candidate;
    }
    return std::nullopt;
}

std::uint64_t TemplateSet::total_support() const {
    return std::accumulate(templates_.begin(), templates_.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const EventTemplate& t) { return acc + t.support; });
}

void TemplateSet::write(std::ostream& out) const {
    out << artifact_header("templates") << '\n';
    out << "#config depth=" << config_.depth << " similarity=" << text::format_double(config_.similarity)
        << " max_children=" << config_.max_children << '\n';
    for (const auto& t : templates_) out << t.event_id << '\t' << t.support << '\t' << t.text() << '\n';
}

TemplateSet TemplateSet::read(std::istream& in) {
    expect_artifact_header(in, "templates");
    std::vector<EventTemplate> templates;
    MinerConfig config;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (text::starts_with(line, "#config ")) {
                for (auto kv : text::split_whitespace(std::string_view(line).substr(8))) {
                    auto eq = kv.find('=');
                    if (eq == std::string_view::npos) continue;
                    auto key = kv.substr(0, eq);
                    auto value = kv.substr(eq + 1);
                    if (key == "depth") config.depth = text::parse_uint(value);
                    else if (key == "similarity") config.similarity = text::parse_double(value);
                    else if (key == "max_children") config.max_children = text::parse_uint(value);
                }
            }
            continue;
        }
        auto cells = text::split(line, '\t');
        if (cells.size() != 3) throw DataError("template line needs 3 tab-separated columns: '" + line + "'");
        EventTemplate t;
        t.event_id = std::string(cells[0]);
        t.support = text::parse_uint(cells[1]);
        t.tokens = tokenize(cells[2]);
        templates.push_back(std::move(t));
    }
    return TemplateSet(std::move(templates), config);
}

void TemplateSet::save(const std::filesystem::path& path) const {
    auto out = open_output(path);
    write(out);
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read(in);
}

// ---------------------------------------------------------------------------
// TemplateMiner

struct TemplateMiner::Node {
    std::map<std::string, std::unique_ptr<Node>, std::less<>> children;
    std::vector<EventIndex> clusters;
};

TemplateMiner::TemplateMiner(MinerConfig config) : config_(config), root_(std::make_unique<Node>()) {
    config_.validate();
}

TemplateMiner::~TemplateMiner() = default;
TemplateMiner::TemplateMiner(TemplateMiner&&) noexcept = default;
TemplateMiner& TemplateMiner::operator=(TemplateMiner&&) noexcept = default;

std::optional<EventIndex> TemplateMiner::search(const std::vector<std::string>& tokens) const {
    auto length_it = root_->children.find(std::to_string(tokens.size()));
    if (length_it == root_->children.end()) return std::nullopt;
    const Node* node = length_it->second.get();
    const std::size_t max_node_depth = config_.depth - 2;
    std::size_t depth = 1;
    for (const auto& token : tokens) {
        if (depth >= max_node_depth || depth >= tokens.size()) break;
        auto it = node->children.find(token);
        if (it == node->children.end()) it = node->children.find(kWildcard);
        if (it == node->children.end()) return std::nullopt;
        node = it->second.get();
        ++depth;
    }

    std::optional<EventIndex> best;
    double best_similarity = -1.0;
    std::size_t best_params = 0;
    for (EventIndex id : node->clusters) {
        const auto& tmpl = clusters_[id].tokens;
        std::size_t same = 0;
        std::size_t params = 0;
        for (std::size_t k = 0; k < tmpl.size(); ++k) {
            if (tmpl[k] == kWildcard) {
                ++params;
            } else if (tmpl[k] == tokens[k]) {
                ++same;
            }
        }
        double similarity = static_cast<double>(same) / static_cast<double>(tmpl.size());
        if (similarity > best_similarity || (similarity == best_similarity && params > best_params)) {
            best_similarity = similarity;
            best_params = params;
            best = id;
        }
    }
    if (best && best_similarity >= config_.similarity) return best;
    return std::nullopt;
}

void TemplateMiner::insert(EventIndex cluster) {
    const auto& tokens = clusters_[cluster].tokens;
    auto& length_node = root_->children[std::to_string(tokens.size())];
    if (!length_node) length_node = std::make_unique<Node>();
    Node* node = length_node.get();
    const std::size_t max_node_depth = config_.depth - 2;
    std::size_t depth = 1;
    const std::string wildcard(kWildcard);
    for (const auto& token : tokens) {
        if (depth >= max_node_depth || depth >= tokens.size()) break;
        auto& children = node->children;
        auto it = children.find(token);
        if (it != children.end()) {
            node = it->second.get();
        } else if (token == kWildcard) {
            auto& child = children[wildcard];
            if (!child) child = std::make_unique<Node>();
            node = child.get();
        } else {
            const bool has_wildcard = children.count(wildcard) > 0;
            const std::size_t limit = config_.max_children;
            std::unique_ptr<Node>* target = nullptr;
            if (has_wildcard) {
                target = children.size() < limit ? &children[token] : &children[wildcard];
            } else if (children.size() + 1 < limit) {
                target = &children[token];
            } else {
                target = &children[wildcard];
            }
            if (!*target) *target = std::make_unique<Node>();
            node = target->get();
        }
        ++depth;
    }
    node->clusters.push_back(cluster);
}

EventIndex TemplateMiner::add(std::string_view content) {
    auto tokens = mask_tokens(content);
    if (auto found = search(tokens)) {
        auto& tmpl = clusters_[*found].tokens;
        for (std::size_t k = 0; k < tmpl.size(); ++k)
            if (tmpl[k] != tokens[k]) tmpl[k] = std::string(kWildcard);
        ++clusters_[*found].support;
        return *found;
    }
    clusters_.push_back(Cluster{std::move(tokens), 1});
    insert(clusters_.size() - 1);
    return clusters_.size() - 1;
}

TemplateSet TemplateMiner::templates() const {
    std::vector<EventTemplate> out;
    out.reserve(clusters_.size());
    for (std::size_t i = 0; i < clusters_.size(); ++i)
        out.push_back(EventTemplate{"E" + std::to_string(i), clusters_[i].tokens, clusters_[i].support});
    return TemplateSet(std::move(out), config_);
}

MiningResult mine(std::span<const LogRecord> records, const MinerConfig& config) {
    TemplateMiner miner(config);
    MiningResult result;
    result.assignment.reserve(records.size());
    for (const auto& record : records) result.assignment.push_back(miner.add(record.content));
    result.templates = miner.templates();
    return result;
}

MiningResult mine_contents(std::span<const std::string> contents, const MinerConfig& config) {
    TemplateMiner miner(config);
    MiningResult result;
    result.assignment.reserve(contents.size());
    for (const auto& content : contents) result.assignment.push_back(miner.add(content));
    result.templates = miner.templates();
    return result;
}

// ---------------------------------------------------------------------------
// Pre-parsed corpora

std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

ParsedCorpus read_parsed(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("structured CSV is empty (missing header)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_row(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (text::trim(header[i]) == name) return i;
        return std::nullopt;
    };
    auto line_col = column("LineId");
    auto event_col = column("EventId");
    auto template_col = column("EventTemplate");
    if (!line_col) throw DataError("structured CSV is missing the LineId column");
    if (!event_col) throw DataError("structured CSV is missing the EventId column");

    struct Row {
        std::uint64_t line_id;
        std::string event_id;
        std::string tmpl;
    };
    std::vector<Row> rows;
    std::uint64_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        auto cells = split_csv_row(line);
        std::size_t needed = std::max(*line_col, *event_col) + 1;
        if (cells.size() < needed) throw DataError("structured CSV row " + std::to_string(row_number) + " is short");
        Row row{text::parse_uint(cells[*line_col]), std::string(text::trim(cells[*event_col])), {}};
        if (template_col && *template_col < cells.size()) row.tmpl = cells[*template_col];
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.line_id < b.line_id; });

    std::vector<EventTemplate> templates;
    std::unordered_map<std::string, EventIndex> seen;
    ParsedCorpus corpus;
    for (const auto& row : rows) {
        auto [it, inserted] = seen.emplace(row.event_id, templates.size());
        if (inserted) {
            EventTemplate t;
            t.event_id = row.event_id;
            if (template_col) {
                t.tokens = tokenize(row.tmpl);
                for (auto& token : t.tokens)
                    if (token == "<*>") token = std::string(kWildcard);
            } else {
                t.tokens = {row.event_id};
            }
            templates.push_back(std::move(t));
        }
        ++templates[it->second].support;
        corpus.events.push_back(it->second);
        corpus.line_ids.push_back(row.line_id);
    }
    corpus.templates = TemplateSet(std::move(templates));
    return corpus;
}

ParsedCorpus load_parsed(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_parsed(in);
}

}  // namespace logcleaner
