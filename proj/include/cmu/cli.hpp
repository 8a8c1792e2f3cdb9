#pragma once

#include <iosfwd>

namespace cmu {

// Entry point of the `cmu` command-line tool. Exit codes: 0 success,
// 1 usage error, 2 input or model error (the error code name is printed).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cmu
