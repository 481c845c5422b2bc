#pragma once

#include <iosfwd>

namespace aquaclear::cli {

// Parses argv, runs one subcommand and returns the process exit code.
// Progress and errors go to `log`.
int run_cli(int argc, const char* const* argv, std::ostream& log);

}  // namespace aquaclear::cli
