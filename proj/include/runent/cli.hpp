#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace runent {

// Runs the command-line tool with the given arguments (program name
// excluded). `in` backs the `stream` subcommand and defaults to std::cin.
// Returns the process exit code: 0 iff no errors.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err,
            std::istream* in = nullptr);

}  // namespace runent
