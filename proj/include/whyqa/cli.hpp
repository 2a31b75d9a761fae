#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace whyqa::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // I/O, format or validation failure
inline constexpr int kUsage = 2;    // unknown subcommand or bad flags

// Entry point behind the `whyqa` executable. Errors are written to `err` as
// one JSON object {"error": {"kind": ..., "message": ...}}.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace whyqa::cli
