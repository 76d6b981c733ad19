#pragma once

#include <iosfwd>

namespace lg {

// Exit status: 0 ok, 1 invalid input, 2 failed verification, 3 budget exhausted.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lg
