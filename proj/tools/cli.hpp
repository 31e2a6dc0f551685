#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace qnr::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kBadInput = 2,
    kIoError = 3,
    kResource = 4,
};

/// Runs the tool with argv-style arguments (args[0] is the program name).
/// Machine-readable output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a non-negative integer, allowing exact scientific notation such as
/// "1e6" or "2.5e3". Throws qnr::DomainError for anything non-integral.
std::uint64_t parse_count(std::string_view text);

} // namespace qnr::cli
