#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logcleaner/ingest.hpp"
#include "logcleaner/types.hpp"

namespace logcleaner {

inline constexpr std::string_view kWildcard = "[*]";

struct MinerConfig {
    std::size_t depth = 4;
    double similarity = 0.5;
    std::size_t max_children = 100;

    void validate() const;
    bool operator==(const MinerConfig&) const = default;
};

struct EventTemplate {
    std::string event_id;
    std::vector<std::string> tokens;
    std::uint64_t support = 0;

    std::string text() const;
    bool operator==(const EventTemplate&) const = default;
};

/// Whitespace tokenization. Blank content yields a single empty token so every
/// template has at least one token.
std::vector<std::string> tokenize(std::string_view content);

/// Tokenization plus the digit mask applied before tree descent.
std::vector<std::string> mask_tokens(std::string_view content);

/// An immutable, indexed list of templates. Matching is safe from concurrent callers.
class TemplateSet {
public:
    TemplateSet() = default;
    TemplateSet(std::vector<EventTemplate> templates, MinerConfig config = {});

    const std::vector<EventTemplate>& templates() const { return templates_; }
    const EventTemplate& operator[](EventIndex i) const { return templates_.at(i); }
    std::size_t size() const { return templates_.size(); }
    bool empty() const { return templates_.empty(); }
    const MinerConfig& config() const { return config_; }

    std::optional<EventIndex> index_of(std::string_view event_id) const;
    EventIndex require(std::string_view event_id) const;

    /// The template whose literal tokens all equal the content's tokens at the same positions,
    /// with equal token count. When several match, the one with the most literals wins, then
    /// the lowest ordinal.
    std::optional<EventIndex> match(std::string_view content) const;
    std::optional<EventIndex> match(const LogRecord& record) const { return match(record.content); }

    std::uint64_t total_support() const;

    void write(std::ostream& out) const;
    static TemplateSet read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static TemplateSet load(const std::filesystem::path& path);

    bool operator==(const TemplateSet& other) const {
        return templates_ == other.templates_ && config_ == other.config_;
    }

private:
    void build_index();

    std::vector<EventTemplate> templates_;
    MinerConfig config_;
    std::unordered_map<std::string, EventIndex> by_id_;
    // Token count -> candidate templates, ordered by descending literal count then ordinal.
    std::unordered_map<std::size_t, std::vector<EventIndex>> by_length_;
    std::vector<std::size_t> literal_count_;
};

struct MiningResult {
    TemplateSet templates;
    /// Template ordinal for every mined record, in input order.
    std::vector<EventIndex> assignment;
};

/// Fixed-depth prefix-tree miner. Mining is order sensitive and not thread safe.
class TemplateMiner {
public:
    explicit TemplateMiner(MinerConfig config = {});
    ~TemplateMiner();
    TemplateMiner(TemplateMiner&&) noexcept;
    TemplateMiner& operator=(TemplateMiner&&) noexcept;

    /// Adds one message and returns the ordinal of the cluster it joined or created.
    EventIndex add(std::string_view content);

    /// Snapshot of the current clusters as a TemplateSet with ids E0..E(n-1).
    TemplateSet templates() const;

private:
    struct Node;
    struct Cluster {
        std::vector<std::string> tokens;
        std::uint64_t support = 0;
    };

    std::optional<EventIndex> search(const std::vector<std::string>& tokens) const;
    void insert(EventIndex cluster);

    MinerConfig config_;
    std::unique_ptr<Node> root_;
    std::vector<Cluster> clusters_;
};

MiningResult mine(std::span<const LogRecord> records, const MinerConfig& config = {});
MiningResult mine_contents(std::span<const std::string> contents, const MinerConfig& config = {});

/// A loghub structured CSV: columns LineId, EventId and optionally EventTemplate.
struct ParsedCorpus {
    TemplateSet templates;
    /// Template ordinal per row, in LineId order.
    std::vector<EventIndex> events;
    std::vector<std::uint64_t> line_ids;
};

ParsedCorpus load_parsed(const std::filesystem::path& path);
ParsedCorpus read_parsed(std::istream& in);

/// Splits one CSV record honoring double quotes.
std::vector<std::string> split_csv_row(std::string_view line);

}  // namespace logcleaner
