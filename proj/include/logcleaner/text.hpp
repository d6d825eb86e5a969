#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace logcleaner::text {

std::vector<std::string_view> split_whitespace(std::string_view line);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::string to_hex(std::uint64_t value);

/// Replaces malformed UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

}  // namespace logcleaner::text
