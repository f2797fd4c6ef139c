#pragma once

#include <string>
#include <vector>

namespace ptm {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { exit_ok = 0, exit_error = 1, exit_tolerance = 2, exit_invalid = 3 };

/// Entry point of the `ptm` executable; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace ptm
