#pragma once

#include <atomic>
#include <iosfwd>

namespace spt::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kBackendFailure = 3;

// Set from a signal handler; training stops after the current epoch.
std::atomic<bool>& abort_flag();

// Entry point shared by the binary and the CLI tests. Tables and reports go
// to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spt::cli
