#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clump::cli {

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`. Returns the process exit code:
/// 0 when every requested output was written, 1 on runtime failure and the
/// parser's code (nonzero) on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clump::cli
