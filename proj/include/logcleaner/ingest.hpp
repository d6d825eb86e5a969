#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logcleaner/types.hpp"

namespace logcleaner {

enum class DatasetFamily { hdfs, bgl, thunderbird, generic };

DatasetFamily parse_family(std::string_view name);
std::string_view to_string(DatasetFamily family);

struct HeaderField {
    std::string name;
    std::string value;

    bool operator==(const HeaderField&) const = default;
};

struct LogRecord {
    std::uint64_t line_index = 0;
    std::string timestamp_text;
    std::vector<HeaderField> header_fields;
    std::string content;

    const std::string* field(std::string_view name) const;
    bool operator==(const LogRecord&) const = default;
};

/// A loghub-style header layout such as `<Date> <Time> <Pid> <Level> <Component>: <Content>`.
///
/// Fields are whitespace separated. A field may carry a literal suffix (the `:` after
/// `<Component>` above) which must terminate the matching token. `<Content>` is always the
/// last field and takes the remainder of the line.
class HeaderFormat {
public:
    HeaderFormat() = default;

    static HeaderFormat parse(std::string_view layout, std::vector<std::string> timestamp_fields = {});
    static HeaderFormat builtin(DatasetFamily family);

    /// Fills header_fields, timestamp_text and content. Returns false when the line does not
    /// fit the layout; the record then carries the whole line as content.
    bool apply(std::string_view line, LogRecord& record) const;

    /// Content of a line under this layout (whole line when it does not fit).
    std::string_view content_of(std::string_view line) const;

    const std::string& layout() const { return layout_; }

private:
    struct Slot {
        std::string name;
        std::string suffix;
    };

    bool split(std::string_view line, std::vector<std::string_view>* values, std::string_view& content) const;

    std::string layout_;
    std::vector<Slot> slots_;
    std::vector<std::string> timestamp_fields_;
};

/// Sequential reader yielding one record per physical line, in file order.
class RecordReader {
public:
    RecordReader(std::istream& in, HeaderFormat format, std::uint64_t max_lines = 0);

    std::optional<LogRecord> next();
    std::uint64_t malformed_lines() const { return malformed_; }

private:
    std::istream* in_;
    HeaderFormat format_;
    std::uint64_t max_lines_;
    std::uint64_t next_index_ = 0;
    std::uint64_t malformed_ = 0;
    std::string buffer_;
};

/// Reads a whole log file; `max_lines` of 0 reads everything.
std::vector<LogRecord> read_records(const std::filesystem::path& path, const HeaderFormat& format,
                                    std::uint64_t max_lines = 0);
std::vector<LogRecord> read_records(const std::filesystem::path& path, DatasetFamily family,
                                    std::uint64_t max_lines = 0);

/// Default Thunderbird line-count prefix.
inline constexpr std::uint64_t kThunderbirdDefaultPrefix = 100'000;

enum class LabelKind { per_line_prefix, per_session_table };

LabelKind parse_label_kind(std::string_view name);

struct LabelSource {
    LabelKind kind = LabelKind::per_line_prefix;
    std::vector<Label> per_line;
    std::unordered_map<std::string, Label> per_session;

    /// Lines past the end of per_line count as normal.
    Label line_label(std::uint64_t line_index) const;
    std::optional<Label> session_label(std::string_view key) const;
};

/// BGL/Thunderbird convention: the first token of every line is an alert tag, `-` for normal.
Label label_from_alert_tag(std::string_view tag);

/// per_line_prefix reads the alert tags of a raw log file; per_session_table reads a
/// `BlockId,Label` CSV with `Normal`/`Anomaly` values.
LabelSource read_labels(const std::filesystem::path& path, LabelKind kind, std::uint64_t max_lines = 0);
LabelSource read_session_labels(std::istream& in);
LabelSource read_line_labels(std::istream& in, std::uint64_t max_lines = 0);

}  // namespace logcleaner
