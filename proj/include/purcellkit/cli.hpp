// Copyright the purcellkit authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef PURCELLKIT_CLI_HPP
#define PURCELLKIT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace purcellkit::cli
{

inline constexpr int EXIT_OK = 0;
inline constexpr int EXIT_USER = 1;
inline constexpr int EXIT_INTERNAL = 2;

// Relative output paths are placed under this directory when it is set.
inline constexpr const char *OUTPUT_DIR_ENV = "PURCELLKIT_OUTPUT_DIR";

// Runs one command line (args excludes the program name). Failures print a single
// "error: ..." line to `err`.
int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace purcellkit::cli

#endif  // PURCELLKIT_CLI_HPP
