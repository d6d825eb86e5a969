#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

namespace logcleaner {

inline constexpr std::string_view kArtifactVersion = "v1";

/// Every persisted file starts with `#logcleaner-<kind> v1`.
struct ArtifactHeader {
    std::string kind;
    std::string version;
};

std::string artifact_header(std::string_view kind);
std::optional<ArtifactHeader> parse_artifact_header(std::string_view line);

/// Consumes the header line; throws DataError on a missing header, wrong kind or wrong version.
void expect_artifact_header(std::istream& in, std::string_view kind, std::string_view source = {});

/// Peeks the header of a file without interpreting the body.
ArtifactHeader read_artifact_header(const std::filesystem::path& path);

std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace logcleaner
