#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ebshrink::cli {

enum ExitCode : int {
    kSuccess = 0,
    kSuiteFailure = 1,
    kUsage = 2,
    kIo = 3,
    kParse = 4,
};

/// Environment variable naming the default output directory for sweep, amp
/// and verify when --out is not given.
inline constexpr const char* kOutputDirEnv = "EBSHRINK_OUTPUT_DIR";

/// One decimal number per line; blank lines and '#' comments are skipped.
/// Throws IoError if the file cannot be read and ParseError on bad lines.
std::vector<double> read_vector_file(const std::string& path);

/// Flat key=value lines with '#' comments.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// args excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ebshrink::cli
