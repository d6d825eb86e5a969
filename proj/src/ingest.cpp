#include "logcleaner/ingest.hpp"

#include <fstream>
#include <istream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

DatasetFamily parse_family(std::string_view name) {
    if (name == "hdfs") return DatasetFamily::hdfs;
    if (name == "bgl") return DatasetFamily::bgl;
    if (name == "thunderbird") return DatasetFamily::thunderbird;
    if (name == "generic") return DatasetFamily::generic;
    throw UsageError("unknown dataset family '" + std::string(name) + "' (hdfs|bgl|thunderbird|generic)");
}

std::string_view to_string(DatasetFamily family) {
    switch (family) {
        case DatasetFamily::hdfs: return "hdfs";
        case DatasetFamily::bgl: return "bgl";
        case DatasetFamily::thunderbird: return "thunderbird";
        case DatasetFamily::generic: return "generic";
    }
    return "generic";
}

const std::string* LogRecord::field(std::string_view name) const {
    for (const auto& f : header_fields)
        if (f.name == name) return &f.value;
    return nullptr;
}

HeaderFormat HeaderFormat::parse(std::string_view layout, std::vector<std::string> timestamp_fields) {
    HeaderFormat format;
    format.layout_ = std::string(layout);
    format.timestamp_fields_ = std::move(timestamp_fields);
    auto tokens = text::split_whitespace(layout);
    if (tokens.empty() || tokens.back() != "<Content>")
        throw UsageError("log format must end with <Content>: '" + std::string(layout) + "'");
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        auto token = tokens[i];
        auto close = token.find('>');
        if (token.empty() || token.front() != '<' || close == std::string_view::npos || close < 2)
            throw UsageError("bad log format field '" + std::string(token) + "'");
        Slot slot{std::string(token.substr(1, close - 1)), std::string(token.substr(close + 1))};
        if (slot.name == "Content") throw UsageError("<Content> must be the last field");
        format.slots_.push_back(std::move(slot));
    }
    return format;
}

HeaderFormat HeaderFormat::builtin(DatasetFamily family) {
    switch (family) {
        case DatasetFamily::hdfs:
            return parse("<Date> <Time> <Pid> <Level> <Component>: <Content>", {"Date", "Time"});
        case DatasetFamily::bgl:
            return parse("<Label> <Timestamp> <Date> <Node> <Time> <NodeRepeat> <Type> <Component> <Level> <Content>",
                         {"Time"});
        case DatasetFamily::thunderbird:
            return parse("<Label> <Timestamp> <Date> <User> <Month> <Day> <Time> <Location> <Component>: <Content>",
                         {"Month", "Day", "Time"});
        case DatasetFamily::generic:
            return parse("<Content>");
    }
    return parse("<Content>");
}

bool HeaderFormat::split(std::string_view line, std::vector<std::string_view>* values,
                         std::string_view& content) const {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    };
    for (const auto& slot : slots_) {
        skip_space();
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        auto token = line.substr(start, pos - start);
        if (token.empty()) return false;
        if (!slot.suffix.empty()) {
            if (token.size() <= slot.suffix.size() ||
                token.substr(token.size() - slot.suffix.size()) != slot.suffix)
                return false;
            token.remove_suffix(slot.suffix.size());
        }
        if (values) values->push_back(token);
    }
    skip_space();
    content = line.substr(pos);
    while (!content.empty() && (content.back() == ' ' || content.back() == '\t')) content.remove_suffix(1);
    return !content.empty();
}

bool HeaderFormat::apply(std::string_view line, LogRecord& record) const {
    record.header_fields.clear();
    record.timestamp_text.clear();
    std::vector<std::string_view> values;
    values.reserve(slots_.size());
    std::string_view content;
    if (!split(line, &values, content)) {
        record.content = std::string(line);
        return slots_.empty();
    }
    for (std::size_t i = 0; i < slots_.size(); ++i)
        record.header_fields.push_back({slots_[i].name, std::string(values[i])});
    for (const auto& name : timestamp_fields_) {
        if (const auto* value = record.field(name)) {
            if (!record.timestamp_text.empty()) record.timestamp_text.push_back(' ');
            record.timestamp_text += *value;
        }
    }
    record.content = std::string(content);
    return true;
}

std::string_view HeaderFormat::content_of(std::string_view line) const {
    std::string_view content;
    if (!split(line, nullptr, content)) return line;
    return content;
}

RecordReader::RecordReader(std::istream& in, HeaderFormat format, std::uint64_t max_lines)
    : in_(&in), format_(std::move(format)), max_lines_(max_lines) {}

std::optional<LogRecord> RecordReader::next() {
    if (max_lines_ != 0 && next_index_ >= max_lines_) return std::nullopt;
    if (!std::getline(*in_, buffer_)) return std::nullopt;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    LogRecord record;
    record.line_index = next_index_++;
    auto clean = text::sanitize_utf8(buffer_);
    if (!format_.apply(clean, record)) ++malformed_;
    return record;
}

std::vector<LogRecord> read_records(const std::filesystem::path& path, const HeaderFormat& format,
                                    std::uint64_t max_lines) {
    auto in = open_input(path);
    RecordReader reader(in, format, max_lines);
    std::vector<LogRecord> records;
    while (auto record = reader.next()) records.push_back(std::move(*record));
    if (in.bad()) throw DataError("read error on " + path.string());
    return records;
}

std::vector<LogRecord> read_records(const std::filesystem::path& path, DatasetFamily family,
                                    std::uint64_t max_lines) {
    return read_records(path, HeaderFormat::builtin(family), max_lines);
}

LabelKind parse_label_kind(std::string_view name) {
    if (name == "per-line-prefix") return LabelKind::per_line_prefix;
    if (name == "per-session-table") return LabelKind::per_session_table;
    throw UsageError("unknown label kind '" + std::string(name) + "' (per-line-prefix|per-session-table)");
}

Label LabelSource::line_label(std::uint64_t line_index) const {
    return line_index < per_line.size() ? per_line[line_index] : Label::normal;
}

std::optional<Label> LabelSource::session_label(std::string_view key) const {
    auto it = per_session.find(std::string(key));
    if (it == per_session.end()) return std::nullopt;
    return it->second;
}

Label label_from_alert_tag(std::string_view tag) {
    return tag == "-" ? Label::normal : Label::anomalous;
}

LabelSource read_line_labels(std::istream& in, std::uint64_t max_lines) {
    LabelSource source;
    source.kind = LabelKind::per_line_prefix;
    std::string line;
    while ((max_lines == 0 || source.per_line.size() < max_lines) && std::getline(in, line)) {
        auto tokens = text::split_whitespace(line);
        // A blank line has no alert tag; treat it as normal like an untagged record.
        source.per_line.push_back(tokens.empty() ? Label::normal : label_from_alert_tag(tokens.front()));
    }
    return source;
}

LabelSource read_session_labels(std::istream& in) {
    LabelSource source;
    source.kind = LabelKind::per_session_table;
    std::string line;
    if (!std::getline(in, line)) return source;
    auto header = text::split(text::trim(line), ',');
    if (header.size() < 2 || text::trim(header[0]) != "BlockId" || text::trim(header[1]) != "Label")
        throw DataError("session label table must start with 'BlockId,Label'");
    std::uint64_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        auto cells = text::split(trimmed, ',');
        if (cells.size() < 2) throw DataError("label row " + std::to_string(row) + " has fewer than 2 columns");
        auto key = std::string(text::trim(cells[0]));
        auto value = text::trim(cells[1]);
        Label label;
        if (value == "Normal") {
            label = Label::normal;
        } else if (value == "Anomaly") {
            label = Label::anomalous;
        } else {
            throw DataError("unknown label '" + std::string(value) + "' on row " + std::to_string(row));
        }
        if (!source.per_session.emplace(key, label).second)
            throw DataError("duplicate session key '" + key + "' on row " + std::to_string(row));
    }
    return source;
}

LabelSource read_labels(const std::filesystem::path& path, LabelKind kind, std::uint64_t max_lines) {
    auto in = open_input(path);
    return kind == LabelKind::per_line_prefix ? read_line_labels(in, max_lines) : read_session_labels(in);
}

}  // namespace logcleaner
