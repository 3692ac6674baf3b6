#pragma once

#include <iosfwd>

namespace psvf {

/// Exit codes: 0 success, 1 failed check or classification error,
/// 2 malformed arguments or manifest.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psvf
