#include <csignal>
#include <iostream>

#include "cli.hpp"
#include "logcleaner/stream_filter.hpp"

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    std::signal(SIGUSR1, [](int) { logcleaner::request_stats_dump(); });
    std::vector<std::string> args(argv + 1, argv + argc);
    return logcleaner::cli::run(args, std::cin, std::cout, std::cerr);
}
