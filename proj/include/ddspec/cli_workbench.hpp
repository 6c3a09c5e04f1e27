#pragma once

#include <iosfwd>

namespace ddspec {

// Entry point of the `ddspec` command. Returns the process exit code:
// 0 success, 1 runtime failure, 2 invalid configuration or usage.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ddspec
