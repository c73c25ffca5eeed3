#pragma once

#include <iosfwd>

namespace trajsal::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

/// Environment variable naming the directory relative output paths resolve
/// against.
inline constexpr const char* kOutputRootEnv = "TRAJSAL_OUTPUT_ROOT";

/// Entry point of the `trajsal` binary; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trajsal::cli
