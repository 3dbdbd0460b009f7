#pragma once

#include <ostream>

namespace isgns::cli {

/// Runs the command line. Data goes to `out` or to files, diagnostics to `err`.
/// Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace isgns::cli
