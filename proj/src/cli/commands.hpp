#pragma once

#include <ostream>

namespace maternfi::cli {

// Parses argv and runs one subcommand. Returns 0 when the requested artifact was written,
// 2 for usage errors and 1 for any other failure; no output file is left behind on failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace maternfi::cli
