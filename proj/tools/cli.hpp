#pragma once

#include <ostream>

namespace qsdc::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kConfigError = 2,
  kProtocolAbort = 3,
  kDecodeFailure = 4,
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qsdc::cli
