#pragma once

#include <ostream>

namespace qnetlab {

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 1 a documented check failed, 2 usage or input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qnetlab
