// Command-line front end; the binary in tools/ is a thin wrapper around run()
// so tests can drive the same code path.
#pragma once

namespace susplab::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit code 0 on success, 1 on usage/config errors, 2 on numeric failures.
int run(int argc, const char* const* argv);

}  // namespace susplab::cli
