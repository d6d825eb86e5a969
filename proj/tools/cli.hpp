#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logcleaner::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2 };

/// Runs one `logcleaner` invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace logcleaner::cli
