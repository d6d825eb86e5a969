#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "logcleaner/detectors.hpp"
#include "logcleaner/ingest.hpp"
#include "logcleaner/profiler.hpp"
#include "logcleaner/study.hpp"
#include "logcleaner/template_miner.hpp"

namespace logcleaner {

inline constexpr std::string_view kEnvPrefix = "LOGCLEANER_";

/// Every knob of a pipeline run. The file form is `#logcleaner-config v1` followed by one
/// `key = value` line per key; precedence is defaults, then file, then environment, then flags.
struct RunConfig {
    DatasetFamily family = DatasetFamily::hdfs;
    std::string log;
    std::string labels;
    LabelKind label_kind = LabelKind::per_session_table;
    std::string log_format;  // custom header layout; empty means the family's built-in one
    std::uint64_t max_lines = 0;
    std::size_t window = 0;  // 0 groups by session key, otherwise fixed windows of this many lines
    std::string session_pattern{kHdfsBlockPattern};
    double train_ratio = 0.8;
    MinerConfig miner;
    std::string model = "dt";
    std::uint64_t seed = 42;
    double alpha = 0.02;
    CandidateOrder order = CandidateOrder::frequency_desc;
    bool multi_pass = false;
    double epsilon = kDefaultEpsilon;
    ProfileConfig profile;
    bool profile_train_only = true;

    static std::vector<std::string> keys();
    std::string get(std::string_view key) const;
    /// Throws UsageError for unknown keys or values that do not parse.
    void set(std::string_view key, std::string_view value);

    /// Applies `LOGCLEANER_<KEY>` variables, key upper-cased.
    void apply_environment(const std::function<const char*(const char*)>& getenv_fn);

    void validate() const;

    HeaderFormat header_format() const;
    ModelSpec model_spec() const;

    void write(std::ostream& out) const;
    static RunConfig read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static RunConfig load(const std::filesystem::path& path);

    bool operator==(const RunConfig&) const = default;
};

/// Parses `session` or a positive window length.
std::size_t parse_window(std::string_view text);

}  // namespace logcleaner
