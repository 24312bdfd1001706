#pragma once

#include <string>
#include <vector>

namespace babelkit {

// Entry point of the babelkit executable. Exit codes: 0 success, 1 I/O error,
// 2 validation error, 3 verification failure.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace babelkit
