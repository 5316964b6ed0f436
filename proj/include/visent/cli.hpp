#pragma once

#include <iosfwd>

namespace visent::cli {

// Full command-line front end. Returns the process exit code:
//   0 success, 2 usage, 3 format, 4 compute, 5 io, 1 unexpected.
// Normal output goes to `out`, diagnostics and warnings to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace visent::cli
