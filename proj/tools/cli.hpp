#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slasf::cli {

// Exit codes of the slasf tool.
enum Exit : int {
    ok = 0,
    invalid = 1,          // I/O, parse or validation error
    design_failed = 2,
    precheck_false = 3,
    verify_failed = 4,
};

// Runs one invocation; args[0] is the program name. Human-readable text goes to `out`, errors to
// `err`, JSON and CSV to the files named by the flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slasf::cli
