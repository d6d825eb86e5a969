#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace logcleaner {

/// Ordinal of an event template inside its TemplateSet.
using EventIndex = std::size_t;

inline constexpr EventIndex kNoEvent = std::numeric_limits<EventIndex>::max();

enum class Label : std::uint8_t { normal = 0, anomalous = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

/// Base class for every error the pipeline reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad flags, bad thresholds, bad configuration. Maps to exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Unreadable or malformed inputs and artifacts. Maps to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace logcleaner
