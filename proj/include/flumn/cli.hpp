#pragma once

#include <iosfwd>

namespace flumn {

// Entry point of the command-line tool (argv[0] is the program name).
// Returns 0 on success, 1 on input/configuration errors, 2 on internal
// failures.  All reports land in --out as JSON/CSV files; nothing is written
// until the whole command has succeeded.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flumn
