#include "logcleaner/artifact.hpp"

#include <fstream>
#include <istream>
#include <string>

#include "logcleaner/text.hpp"
#include "logcleaner/types.hpp"

namespace logcleaner {

std::string artifact_header(std::string_view kind) {
    return "#logcleaner-" + std::string(kind) + " " + std::string(kArtifactVersion);
}

std::optional<ArtifactHeader> parse_artifact_header(std::string_view line) {
    line = text::trim(line);
    constexpr std::string_view prefix = "#logcleaner-";
    if (!text::starts_with(line, prefix)) return std::nullopt;
    auto parts = text::split_whitespace(line.substr(prefix.size()));
    if (parts.size() != 2) return std::nullopt;
    return ArtifactHeader{std::string(parts[0]), std::string(parts[1])};
}

void expect_artifact_header(std::istream& in, std::string_view kind, std::string_view source) {
    std::string line;
    std::string where = source.empty() ? std::string() : " in " + std::string(source);
    if (!std::getline(in, line)) throw DataError("empty artifact" + where + ", expected " + artifact_header(kind));
    auto header = parse_artifact_header(line);
    if (!header || header->kind != kind)
        throw DataError("expected header '" + artifact_header(kind) + "'" + where + ", got '" + line + "'");
    if (header->version != kArtifactVersion)
        throw DataError("unsupported " + header->kind + " version " + header->version + where);
}

ArtifactHeader read_artifact_header(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    std::getline(in, line);
    auto header = parse_artifact_header(line);
    if (!header) throw DataError("not a logcleaner artifact: " + path.string());
    return *header;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

}  // namespace logcleaner
