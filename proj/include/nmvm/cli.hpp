#pragma once

#include <ostream>

namespace nmvm::cli {

/// Runs the `nmvm` command line. Data goes to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 on bad input, 2 on numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nmvm::cli
