// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ftft::cli {

// Stable exit codes for scripting.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

struct Options {
    bool color = false;  // ANSI styling of headers and diagnostics
};

// True unless FTFT_NO_COLOR is set or stdout is not a terminal.
bool color_from_environment();

// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Options& options = {});

}  // namespace ftft::cli
