#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aoaq::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kViolations = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kIoError = 3;

struct Environment {
    std::optional<std::string> default_seed;  // AOAQ_SEED
};

Environment environment_from_process();

// args excludes the program name. Output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& env = {});

}  // namespace aoaq::cli
